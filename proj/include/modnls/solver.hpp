#pragma once

// Picard iteration for the Duhamel form
//   u(t) = e^{i W_t Delta} u0 - i int_0^t e^{i (W_t - W_t') Delta} |u|^2 u(t') dt'
// on a uniform time grid, Galerkin-truncated to the box |k_i| <= N.
//
// Iterates are stored in the interaction picture: u_k(t_n) = e^{-i W_n |k|^2} (u0_k + D_k(t_n)).
// Distances and mass changes are evaluated from D, which keeps them free of the
// cancellation that u(t) - u0 would suffer for small data.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "modnls/common.hpp"
#include "modnls/lattice.hpp"
#include "modnls/modulation.hpp"
#include "modnls/spectral.hpp"
#include "modnls/variation.hpp"

namespace modnls {

struct SolverConfig {
  double s = 0.5;
  long N_freq = 8;
  double dt = 1e-3;
  double T = 0.1;
  std::optional<double> epsilon;  // defaults to s / 5
  double beta = 1.0;
  double fixed_point_tol = 1e-12;  // absolute, sup over the grid of the H^s distance
  int max_iterations = 50;
  bool nonlinearity_on = true;
  bool short_interval = false;  // require T <= beta / N^{4 eps}
  unsigned workers = 1;

  double eps() const { return epsilon.value_or(s / 5.0); }

  /// |I_N| = beta / N^{4 eps}.
  double interval_length() const {
    return beta / std::pow(static_cast<double>(std::max<long>(N_freq, 1)), 4.0 * eps());
  }

  FrequencyBox box() const { return FrequencyBox({0, 0}, N_freq); }

  void validate() const {
    if (!(s > 0.0)) throw std::invalid_argument("SolverConfig: s must be > 0");
    if (N_freq < 0) throw std::invalid_argument("SolverConfig: N_freq must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("SolverConfig: dt must be > 0");
    if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("SolverConfig: T must be finite and >= 0");
    if (!(eps() > 0.0 && eps() < s)) throw std::invalid_argument("SolverConfig: need 0 < epsilon < s");
    if (!(beta > 0.0)) throw std::invalid_argument("SolverConfig: beta must be > 0");
    if (!(fixed_point_tol > 0.0)) throw std::invalid_argument("SolverConfig: fixed_point_tol must be > 0");
    if (max_iterations < 1) throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
    if (short_interval && T > interval_length() * (1.0 + 1e-12))
      throw std::invalid_argument("SolverConfig: T exceeds beta / N^{4 eps}");
  }
};

struct Solution {
  std::vector<double> times;
  std::vector<FourierField> fields;
  std::vector<std::vector<cplx>> increment;  // D(t_n), interaction picture
  FourierField initial;
  std::vector<double> distances;  // sup_n ||u^{(m+1)} - u^{(m)}||_{H^s}
  std::vector<double> factors;    // distances[m] / distances[m - 1]
  double residual = 0.0;          // sup_n ||Phi(u) - u||_{H^s} for the returned u
  double mass0 = 0.0;
  std::vector<double> mass_change;  // mass(u(t_n)) - mass(u0)
  bool converged = false;
  int iterations = 0;
  std::optional<ModulationPath> path;

  Trajectory trajectory() const { return {times, fields}; }
  std::vector<double> mass_trajectory() const {
    std::vector<double> m(mass_change.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = mass0 + mass_change[i];
    return m;
  }
};

/// ||u||_{L^2}^2 = (2 pi)^2 sum |u_k|^2.
inline double mass(const FourierField& u) {
  double acc = 0.0;
  for (const auto& v : u.data()) acc += std::norm(v);
  return two_pi * two_pi * acc;
}

/// max_n |mass(u(t_n)) - mass(u0)| / mass(u0); 0 for zero data.
inline double mass_drift(const Solution& sol) {
  if (sol.mass0 == 0.0) return 0.0;
  double m = 0.0;
  for (double d : sol.mass_change) m = std::max(m, std::abs(d));
  return m / sol.mass0;
}

namespace detail {

// Q_n = int_0^{t_n} e^{i W(t') |k|^2} G(t') dt' by the composite trapezoid rule with
// compensated summation. g[n] already carries the twist.
inline std::vector<std::vector<cplx>> twisted_prefix(const std::vector<std::vector<cplx>>& g,
                                                     const std::vector<double>& times) {
  const std::size_t n = times.size();
  const std::size_t dim = g.empty() ? 0 : g.front().size();
  std::vector<std::vector<cplx>> q(n, std::vector<cplx>(dim));
  std::vector<cplx> comp(dim);
  for (std::size_t i = 1; i < n; ++i) {
    const double h = 0.5 * (times[i] - times[i - 1]);
    for (std::size_t k = 0; k < dim; ++k) {
      const cplx y = h * (g[i - 1][k] + g[i][k]) - comp[k];
      const cplx t = q[i - 1][k] + y;
      comp[k] = (t - q[i - 1][k]) - y;
      q[i][k] = t;
    }
  }
  return q;
}

inline std::vector<std::vector<cplx>> phase_table(const FrequencyBox& box, const std::vector<double>& w) {
  std::vector<std::vector<cplx>> tw(w.size(), std::vector<cplx>(box.size()));
  for (std::size_t n = 0; n < w.size(); ++n)
    for (std::size_t i = 0; i < box.size(); ++i) tw[n][i] = twist(w[n], box.point(i));
  return tw;
}

inline std::vector<double> path_values(const ModulationPath& path, const std::vector<double>& times) {
  std::vector<double> w(times.size());
  for (std::size_t n = 0; n < times.size(); ++n) {
    if (!path.in_domain(times[n])) throw std::out_of_range("solver: time grid leaves the path domain");
    w[n] = path(times[n]);
  }
  return w;
}

}  // namespace detail

/// Trapezoid approximation of int_0^{t_n} e^{i (W_{t_n} - W_t') Delta} F(t') dt' at every node.
inline Trajectory duhamel_prefix(const Trajectory& F, const ModulationPath& path) {
  F.validate();
  const auto& box = F.box();
  const auto w = detail::path_values(path, F.times);
  const auto tw = detail::phase_table(box, w);
  std::vector<std::vector<cplx>> g(F.times.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    g[n] = F.fields[n].data();
    for (std::size_t i = 0; i < box.size(); ++i) g[n][i] *= tw[n][i];
  }
  const auto q = detail::twisted_prefix(g, F.times);
  std::vector<FourierField> out;
  out.reserve(q.size());
  for (std::size_t n = 0; n < q.size(); ++n) {
    std::vector<cplx> v = q[n];
    for (std::size_t i = 0; i < box.size(); ++i) v[i] *= std::conj(tw[n][i]);
    out.emplace_back(box, std::move(v));
  }
  return {F.times, std::move(out)};
}

/// The Duhamel integral at the final node of F's grid.
inline FourierField duhamel_integral(const Trajectory& F, const ModulationPath& path) {
  return duhamel_prefix(F, path).fields.back();
}

/// Uniform grid t_n = n T / round(T / dt).
inline std::vector<double> solver_grid(double T, double dt) {
  if (T == 0.0) return {0.0};
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(T / dt)));
  std::vector<double> t(steps + 1);
  for (std::size_t n = 0; n <= steps; ++n) t[n] = T * static_cast<double>(n) / static_cast<double>(steps);
  t.back() = T;
  return t;
}

namespace detail {

class PicardMap {
 public:
  PicardMap(const FourierField& u0, const ModulationPath& path, const SolverConfig& cfg)
      : u0_(u0), cfg_(cfg), times_(solver_grid(cfg.T, cfg.dt)) {
    const auto w = path_values(path, times_);
    tw_ = phase_table(u0.box(), w);
    weight_.resize(u0.box().size());
    for (std::size_t i = 0; i < weight_.size(); ++i) weight_[i] = sobolev_weight(u0.box().point(i), cfg.s);
  }

  const std::vector<double>& times() const { return times_; }

  FourierField field(const std::vector<cplx>& d, std::size_t n) const {
    std::vector<cplx> v(d.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::conj(tw_[n][i]) * (u0_.data()[i] + d[i]);
    return {u0_.box(), std::move(v)};
  }

  /// Interaction-picture increment of Phi(u) for u given by its increment d.
  std::vector<std::vector<cplx>> apply(const std::vector<std::vector<cplx>>& d) const {
    const std::size_t n = times_.size();
    std::vector<std::vector<cplx>> g(n);
    parallel_for(n, cfg_.workers, [&](std::size_t i) {
      auto nl = cubic_nonlinearity_projected(field(d[i], i)).data();
      for (std::size_t k = 0; k < nl.size(); ++k) nl[k] *= tw_[i][k];
      g[i] = std::move(nl);
    });
    auto q = twisted_prefix(g, times_);
    for (auto& row : q)
      for (auto& v : row) v *= cplx(0.0, -1.0);
    return q;
  }

  double distance(const std::vector<std::vector<cplx>>& a, const std::vector<std::vector<cplx>>& b) const {
    double m = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
      double acc = 0.0;
      for (std::size_t i = 0; i < a[n].size(); ++i) acc += weight_[i] * std::norm(a[n][i] - b[n][i]);
      m = std::max(m, acc);
    }
    return two_pi * std::sqrt(m);
  }

  std::vector<double> mass_change(const std::vector<std::vector<cplx>>& d) const {
    std::vector<double> out(d.size());
    for (std::size_t n = 0; n < d.size(); ++n) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d[n].size(); ++i)
        acc += 2.0 * (std::conj(u0_.data()[i]) * d[n][i]).real() + std::norm(d[n][i]);
      out[n] = two_pi * two_pi * acc;
    }
    return out;
  }

 private:
  FourierField u0_;
  SolverConfig cfg_;
  std::vector<double> times_;
  std::vector<std::vector<cplx>> tw_;
  std::vector<double> weight_;
};

}  // namespace detail

/// Picard iteration from the free evolution until the sup-H^s step falls below the tolerance.
inline Solution picard_solve(const FourierField& u0_in, const ModulationPath& path, const SolverConfig& cfg) {
  cfg.validate();
  const FourierField u0 = restrict_to(u0_in, cfg.box());
  if (std::abs(mass(u0) - mass(u0_in)) > 1e-14 * std::max(mass(u0_in), 1e-300))
    throw std::invalid_argument("picard_solve: initial data not supported in the solver box");
  if (!path.in_domain(0.0) || !path.in_domain(cfg.T))
    throw std::out_of_range("picard_solve: [0, T] is not inside the path domain");
  detail::PicardMap phi(u0, path, cfg);
  const std::size_t n = phi.times().size();
  std::vector<std::vector<cplx>> d(n, std::vector<cplx>(u0.size()));

  Solution sol;
  sol.times = phi.times();
  sol.initial = u0;
  sol.path = path;
  sol.mass0 = mass(u0);
  if (!cfg.nonlinearity_on || n == 1) {
    sol.converged = true;
  } else {
    for (int m = 0; m < cfg.max_iterations; ++m) {
      auto next = phi.apply(d);
      const double dist = phi.distance(next, d);
      sol.distances.push_back(dist);
      if (m > 0) sol.factors.push_back(sol.distances[m - 1] > 0.0 ? dist / sol.distances[m - 1] : 0.0);
      d = std::move(next);
      sol.iterations = m + 1;
      if (dist < cfg.fixed_point_tol) {
        sol.converged = true;
        break;
      }
    }
    sol.residual = phi.distance(phi.apply(d), d);
  }
  sol.fields.reserve(n);
  for (std::size_t i = 0; i < n; ++i) sol.fields.push_back(phi.field(d[i], i));
  sol.mass_change = phi.mass_change(d);
  sol.increment = std::move(d);
  return sol;
}

/// ||1_{I_N} u||_{Y^0(V^2)} + N^{-s} ||1_{I_N} u||_{Y^s(V^2)} on the solution grid.
inline double zn_surrogate_norm(const Solution& sol, const SolverConfig& cfg) {
  if (!sol.path) throw std::invalid_argument("zn_surrogate_norm: solution carries no path");
  if (sol.times.back() > cfg.interval_length() * (1.0 + 1e-12))
    throw std::invalid_argument("zn_surrogate_norm: solution grid extends past beta / N^{4 eps}");
  const auto traj = sol.trajectory();
  const double n = static_cast<double>(std::max<long>(cfg.N_freq, 1));
  return ys_vp_norm(traj, *sol.path, 0.0, 2.0, cfg.workers) +
         std::pow(n, -cfg.s) * ys_vp_norm(traj, *sol.path, cfg.s, 2.0, cfg.workers);
}

struct BetaSelection {
  double beta = 1.0;
  double T = 0.0;
  double first_factor = 0.0;
  bool met_target = false;
  std::vector<std::pair<double, double>> history;  // (beta, first contraction factor)
};

/// First contraction factor d_1 / d_0 at horizon T = beta / N^{4 eps}.
inline double first_contraction_factor(const FourierField& u0, const ModulationPath& path, SolverConfig cfg) {
  cfg.T = cfg.interval_length();
  cfg.max_iterations = 2;
  cfg.fixed_point_tol = std::numeric_limits<double>::min();
  cfg.nonlinearity_on = true;
  const auto sol = picard_solve(u0, path, cfg);
  return sol.factors.empty() ? 0.0 : sol.factors.front();
}

/// Halves beta from cfg.beta until the first contraction factor drops below 1/2.
inline BetaSelection select_beta(const FourierField& u0, const ModulationPath& path, SolverConfig cfg,
                                 int max_halvings = 30) {
  BetaSelection r;
  for (int i = 0; i <= max_halvings; ++i) {
    const double f = first_contraction_factor(u0, path, cfg);
    r.history.emplace_back(cfg.beta, f);
    r.beta = cfg.beta;
    r.T = cfg.interval_length();
    r.first_factor = f;
    if (f < 0.5) {
      r.met_target = true;
      break;
    }
    cfg.beta *= 0.5;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Linear-flow convergence

struct FlowConvergenceRow {
  double delta = 0.0;
  double value = 0.0;  // sup over grid times t <= delta of ||e^{i W_t Delta} u0 - u0||_{L^2}
  double argmax = 0.0;
};

/// ||e^{i w Delta} u0 - u0||_{L^2} = 2 pi (sum_k 4 sin^2(w |k|^2 / 2) |u0_k|^2)^{1/2}.
inline double free_flow_displacement(const FourierField& u0, double w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u0.size(); ++i) {
    const double sn = std::sin(0.5 * w * static_cast<double>(u0.point(i).norm2()));
    acc += 4.0 * sn * sn * std::norm(u0.data()[i]);
  }
  return two_pi * std::sqrt(acc);
}

/// Uses the path's own time nodes as the grid.
inline std::vector<FlowConvergenceRow> linear_flow_convergence(const FourierField& u0, const ModulationPath& path,
                                                               const std::vector<double>& deltas) {
  std::vector<FlowConvergenceRow> out;
  for (double delta : deltas) {
    if (!(delta > 0.0) || !path.in_domain(delta))
      throw std::out_of_range("linear_flow_convergence: delta outside the path domain");
    FlowConvergenceRow row{delta, 0.0, path.start()};
    const auto& T = path.times();
    const auto& W = path.values();
    for (std::size_t n = 0; n < T.size() && T[n] <= delta; ++n) {
      const double v = free_flow_displacement(u0, W[n]);
      if (v > row.value) {
        row.value = v;
        row.argmax = T[n];
      }
    }
    out.push_back(row);
  }
  return out;
}

}  // namespace modnls
