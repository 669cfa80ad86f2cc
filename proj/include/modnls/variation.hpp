#pragma once

// p-variation of sampled signals and the Y^s(V^p) aggregation of coefficient
// trajectories. Partitions are drawn from the sample grid and always contain
// both endpoints; the value at the left endpoint counts as a jump from zero.
// Norms here are coefficient-level: no (2 pi) factor.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "modnls/common.hpp"
#include "modnls/lattice.hpp"
#include "modnls/modulation.hpp"
#include "modnls/spectral.hpp"

namespace modnls {

struct SampledSignal {
  std::vector<double> times;
  std::vector<cplx> values;

  SampledSignal() = default;
  SampledSignal(std::vector<double> t, std::vector<cplx> v) : times(std::move(t)), values(std::move(v)) {
    validate_times(times);
    if (values.size() != times.size()) throw std::invalid_argument("SampledSignal: times and values differ in length");
  }

  static void validate_times(const std::vector<double>& t) {
    if (t.empty()) throw std::invalid_argument("SampledSignal: need at least one sample");
    for (std::size_t i = 1; i < t.size(); ++i)
      if (!(t[i] > t[i - 1])) throw std::invalid_argument("SampledSignal: times must be strictly increasing");
  }
};

namespace detail {

inline void check_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("vp_norm: p must be a finite real > 1");
}

}  // namespace detail

/// max over partitions 0 = i_0 < ... < i_k = n - 1 of start(i_0) + sum jump(i_{l-1}, i_l),
/// where start and jump already carry the p-th power. O(n^2).
template <class Start, class Jump>
double vp_power_dp(std::size_t n, Start&& start, Jump&& jump) {
  if (n == 0) throw std::invalid_argument("vp_power_dp: empty signal");
  std::vector<double> best(n, -1.0);
  best[0] = start(std::size_t{0});
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i) best[j] = std::max(best[j], best[i] + jump(i, j));
  return best[n - 1];
}

/// Exact V^p norm of a scalar sampled signal.
inline double vp_norm(const SampledSignal& v, double p) {
  detail::check_p(p);
  const auto& x = v.values;
  return std::pow(vp_power_dp(
                      x.size(), [&](std::size_t i) { return std::pow(std::abs(x[i]), p); },
                      [&](std::size_t i, std::size_t j) { return std::pow(std::abs(x[j] - x[i]), p); }),
                  1.0 / p);
}

/// V^p norm of a vector-valued signal for a caller-supplied norm.
template <class Vec, class Norm>
double vp_norm_vector(const std::vector<Vec>& values, double p, Norm&& norm) {
  detail::check_p(p);
  return std::pow(vp_power_dp(
                      values.size(), [&](std::size_t i) { return std::pow(norm(values[i]), p); },
                      [&](std::size_t i, std::size_t j) {
                        Vec d = values[j];
                        for (std::size_t k = 0; k < d.size(); ++k) d[k] -= values[i][k];
                        return std::pow(norm(d), p);
                      }),
                  1.0 / p);
}

// ---------------------------------------------------------------------------
// Coefficient trajectories

/// Fields u(t_n) on a shared box and time grid.
struct Trajectory {
  std::vector<double> times;
  std::vector<FourierField> fields;

  Trajectory() = default;
  Trajectory(std::vector<double> t, std::vector<FourierField> f) : times(std::move(t)), fields(std::move(f)) {
    validate();
  }

  void validate() const {
    SampledSignal::validate_times(times);
    if (fields.size() != times.size()) throw std::invalid_argument("Trajectory: one field per time required");
    for (const auto& f : fields)
      if (!(f.box() == fields.front().box())) throw std::invalid_argument("Trajectory: fields on different boxes");
  }

  const FrequencyBox& box() const { return fields.front().box(); }

  SampledSignal coefficient(Vec2 k) const {
    std::vector<cplx> v(times.size());
    for (std::size_t n = 0; n < times.size(); ++n) v[n] = fields[n].at(k);
    return {times, v};
  }

  Trajectory projected(const std::function<bool(Vec2)>& in_set) const {
    Trajectory out = *this;
    for (auto& f : out.fields) f = project(f, in_set);
    return out;
  }
};

/// Free evolution e^{i W_t Delta} u0 sampled on `times`.
inline Trajectory free_evolution(const FourierField& u0, const ModulationPath& path, const std::vector<double>& times) {
  std::vector<FourierField> f;
  f.reserve(times.size());
  for (double t : times) f.push_back(propagate(u0, path, t));
  return {times, std::move(f)};
}

struct CoefficientContribution {
  Vec2 k;
  double weight = 0.0;  // <k>^{2s}
  double vp = 0.0;      // V^p norm of the twisted coefficient
};

struct YsReport {
  double value = 0.0;
  double s = 0.0;
  double p = 2.0;
  std::vector<CoefficientContribution> contributions;
};

namespace detail {

inline void check_path_grid(const std::vector<double>& times, const ModulationPath& path) {
  if (!path.in_domain(times.front()) || !path.in_domain(times.back()))
    throw std::out_of_range("Y^s norm: time grid leaves the path domain");
}

inline double sobolev_weight(Vec2 k, double s) {
  return s == 0.0 ? 1.0 : std::pow(1.0 + static_cast<double>(k.norm2()), s);
}

inline cplx twist(double w, Vec2 k) {
  const double ph = w * static_cast<double>(k.norm2());
  return {std::cos(ph), std::sin(ph)};
}

}  // namespace detail

/// (sum_k <k>^{2s} ||e^{i W_t |k|^2} u_k(t)||_{V^p}^2)^{1/2} with per-k contributions.
inline YsReport ys_vp_report(const std::map<Vec2, SampledSignal>& traj, const ModulationPath& path, double s,
                             double p, unsigned workers = 1) {
  detail::check_p(p);
  YsReport r;
  r.s = s;
  r.p = p;
  if (traj.empty()) return r;
  const auto& grid = traj.begin()->second.times;
  for (const auto& [k, sig] : traj)
    if (sig.times != grid) throw std::invalid_argument("ys_vp_norm: trajectories do not share one time grid");
  detail::check_path_grid(grid, path);
  std::vector<double> w(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) w[n] = path(grid[n]);
  std::vector<const std::pair<const Vec2, SampledSignal>*> items;
  for (const auto& kv : traj) items.push_back(&kv);
  r.contributions.resize(items.size());
  parallel_for(items.size(), workers, [&](std::size_t i) {
    const auto& [k, sig] = *items[i];
    SampledSignal tw = sig;
    for (std::size_t n = 0; n < grid.size(); ++n) tw.values[n] *= detail::twist(w[n], k);
    r.contributions[i] = {k, detail::sobolev_weight(k, s), vp_norm(tw, p)};
  });
  double acc = 0.0;
  for (const auto& c : r.contributions) acc += c.weight * c.vp * c.vp;
  r.value = std::sqrt(acc);
  return r;
}

inline YsReport ys_vp_report(const Trajectory& u, const ModulationPath& path, double s, double p,
                             unsigned workers = 1) {
  u.validate();
  std::map<Vec2, SampledSignal> m;
  for (std::size_t i = 0; i < u.box().size(); ++i) {
    const Vec2 k = u.box().point(i);
    m.emplace(k, u.coefficient(k));
  }
  return ys_vp_report(m, path, s, p, workers);
}

inline double ys_vp_norm(const std::map<Vec2, SampledSignal>& traj, const ModulationPath& path, double s, double p) {
  return ys_vp_report(traj, path, s, p).value;
}

inline double ys_vp_norm(const Trajectory& u, const ModulationPath& path, double s, double p, unsigned workers = 1) {
  return ys_vp_report(u, path, s, p, workers).value;
}

/// V^p norm of the H^s-valued twisted trajectory t -> e^{-i W_t Delta} u(t).
inline double vpw_hs_norm(const Trajectory& u, const ModulationPath& path, double s, double p) {
  u.validate();
  detail::check_path_grid(u.times, path);
  const auto& box = u.box();
  std::vector<double> wt(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) wt[i] = detail::sobolev_weight(box.point(i), s);
  std::vector<std::vector<cplx>> tw(u.times.size());
  for (std::size_t n = 0; n < u.times.size(); ++n) {
    const double w = path(u.times[n]);
    tw[n] = u.fields[n].data();
    for (std::size_t i = 0; i < box.size(); ++i) tw[n][i] *= detail::twist(w, box.point(i));
  }
  return vp_norm_vector(tw, p, [&](const std::vector<cplx>& v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += wt[i] * std::norm(v[i]);
    return std::sqrt(acc);
  });
}

inline double vpw_hs_norm(const std::map<Vec2, SampledSignal>& traj, const ModulationPath& path, double s, double p) {
  if (traj.empty()) return 0.0;
  const auto& grid = traj.begin()->second.times;
  std::vector<FourierField> fields;
  long reach = 0;
  for (const auto& [k, sig] : traj) {
    if (sig.times != grid) throw std::invalid_argument("vpw_hs_norm: trajectories do not share one time grid");
    reach = std::max({reach, std::abs(k.x), std::abs(k.y)});
  }
  const FrequencyBox box({0, 0}, reach);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    FourierField f(box);
    for (const auto& [k, sig] : traj) f[k] = sig.values[n];
    fields.push_back(std::move(f));
  }
  return vpw_hs_norm(Trajectory(grid, std::move(fields)), path, s, p);
}

// ---------------------------------------------------------------------------
// U^p atoms

/// a = sum_j 1_{[t_{j-1}, t_j)} phi_j with (sum ||phi_j||^p)^{1/p} = 1 (l^2 norm on steps).
struct UpAtom {
  std::vector<double> partition;  // t_0 < ... < t_k
  std::vector<std::vector<cplx>> steps;  // phi_1 .. phi_k
  double p = 2.0;

  std::vector<cplx> operator()(double t) const {
    const std::size_t dim = steps.front().size();
    for (std::size_t j = 0; j + 1 < partition.size(); ++j)
      if (t >= partition[j] && t < partition[j + 1]) return steps[j];
    return std::vector<cplx>(dim);
  }

  /// Values at the partition points: phi_1, ..., phi_k, then 0 at t_k.
  std::vector<std::vector<cplx>> samples() const {
    auto out = steps;
    out.emplace_back(steps.front().size());
    return out;
  }
};

struct UpAtomReport {
  UpAtom atom;
  double vp = 0.0;
  double bound = 2.0;  // partition-independent bound checked against vp
};

inline double l2_vector_norm(const std::vector<cplx>& v) {
  double acc = 0.0;
  for (const auto& x : v) acc += std::norm(x);
  return std::sqrt(acc);
}

/// Builds the atom, checks normalization to 1e-9 and reports its V^p norm on the partition.
inline UpAtomReport make_up_atom(std::vector<double> partition, std::vector<std::vector<cplx>> steps, double p) {
  detail::check_p(p);
  SampledSignal::validate_times(partition);
  if (steps.empty() || steps.size() + 1 != partition.size())
    throw std::invalid_argument("make_up_atom: need one step per partition interval");
  for (const auto& s : steps)
    if (s.size() != steps.front().size()) throw std::invalid_argument("make_up_atom: steps of different dimension");
  double acc = 0.0;
  for (const auto& s : steps) acc += std::pow(l2_vector_norm(s), p);
  if (std::abs(std::pow(acc, 1.0 / p) - 1.0) > 1e-9)
    throw std::invalid_argument("make_up_atom: steps violate (sum ||phi_j||^p)^{1/p} = 1");
  UpAtomReport r;
  r.atom = {std::move(partition), std::move(steps), p};
  r.vp = vp_norm_vector(r.atom.samples(), p, l2_vector_norm);
  if (r.vp > r.bound + 1e-12) throw std::logic_error("make_up_atom: V^p norm exceeds the atom bound");
  return r;
}

}  // namespace modnls
