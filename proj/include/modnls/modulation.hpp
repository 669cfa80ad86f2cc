#pragma once

// Modulation paths W_t: identity, fractional Brownian motion and user-supplied
// samples, all piecewise linear between grid points.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "modnls/common.hpp"
#include "modnls/fft.hpp"

namespace modnls {

enum class PathKind { identity, fbm, custom };

inline const char* to_string(PathKind k) {
  switch (k) {
    case PathKind::identity: return "identity";
    case PathKind::fbm: return "fbm";
    case PathKind::custom: return "custom";
  }
  return "?";
}

class ModulationPath {
 public:
  ModulationPath(std::vector<double> times, std::vector<double> values, PathKind kind = PathKind::custom,
                 double hurst = 0.0, std::uint64_t seed = 0)
      : times_(std::move(times)), values_(std::move(values)), kind_(kind), hurst_(hurst), seed_(seed) {
    if (times_.empty() || times_.size() != values_.size())
      throw std::invalid_argument("ModulationPath: need matching, nonempty time and value grids");
    for (std::size_t i = 0; i < times_.size(); ++i) {
      if (!std::isfinite(times_[i]) || !std::isfinite(values_[i]))
        throw std::invalid_argument("ModulationPath: nonfinite sample");
      if (i > 0 && !(times_[i] > times_[i - 1]))
        throw std::invalid_argument("ModulationPath: times must be strictly increasing");
    }
  }

  /// W(t) = t on a uniform grid of `steps` segments over [0, horizon].
  static ModulationPath identity(double horizon, std::size_t steps = 1) {
    if (!(horizon > 0.0) || steps == 0) throw std::invalid_argument("identity path: need horizon > 0, steps >= 1");
    std::vector<double> t(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) t[i] = horizon * static_cast<double>(i) / static_cast<double>(steps);
    t.back() = horizon;
    return ModulationPath(t, t, PathKind::identity);
  }

  static ModulationPath constant(double horizon, double value = 0.0) {
    return ModulationPath({0.0, horizon}, {value, value}, PathKind::custom);
  }

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  PathKind kind() const { return kind_; }
  double hurst() const { return hurst_; }
  std::uint64_t seed() const { return seed_; }
  double start() const { return times_.front(); }
  double end() const { return times_.back(); }
  std::size_t segments() const { return times_.size() - 1; }

  bool in_domain(double t) const { return t >= start() && t <= end(); }

  /// Index i of the segment [t_i, t_{i+1}] containing t.
  std::size_t segment_of(double t) const {
    if (!in_domain(t)) throw std::out_of_range("ModulationPath: time outside the path domain");
    if (times_.size() == 1) return 0;
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - times_.begin());
    return std::min(i == 0 ? 0 : i - 1, times_.size() - 2);
  }

  double operator()(double t) const {
    if (times_.size() == 1) {
      if (t != times_.front()) throw std::out_of_range("ModulationPath: time outside the path domain");
      return values_.front();
    }
    const std::size_t i = segment_of(t);
    if (t == times_[i]) return values_[i];
    if (t == times_[i + 1]) return values_[i + 1];
    const double a = (t - times_[i]) / (times_[i + 1] - times_[i]);
    return values_[i] + a * (values_[i + 1] - values_[i]);
  }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  PathKind kind_;
  double hurst_;
  std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Fractional Brownian motion

enum class FbmMethod { automatic, circulant, cholesky };

/// Autocovariance of unit-step fractional Gaussian noise at lag k.
inline double fgn_autocovariance(double hurst, long k) {
  const double a = static_cast<double>(std::abs(k));
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(a + 1.0, h2) - 2.0 * std::pow(a, h2) + std::pow(std::abs(a - 1.0), h2));
}

namespace detail {

// Eigenvalues of the 2n circulant embedding of the n x n fGn covariance.
inline std::vector<double> circulant_eigenvalues(double hurst, std::size_t n) {
  std::vector<cplx> c(2 * n);
  for (std::size_t k = 0; k <= n; ++k) c[k] = fgn_autocovariance(hurst, static_cast<long>(k));
  for (std::size_t k = n + 1; k < 2 * n; ++k) c[k] = c[2 * n - k];
  fft::transform(c, fft::Direction::forward);
  std::vector<double> lam(2 * n);
  for (std::size_t k = 0; k < 2 * n; ++k) lam[k] = c[k].real();
  return lam;
}

inline std::optional<std::vector<double>> fgn_circulant(double hurst, std::size_t n, std::mt19937_64& rng) {
  const auto lam = circulant_eigenvalues(hurst, n);
  double top = 0.0;
  for (double l : lam) top = std::max(top, std::abs(l));
  for (double l : lam)
    if (l < -1e-12 * top) return std::nullopt;
  std::normal_distribution<double> normal(0.0, 1.0);
  const double m = static_cast<double>(2 * n);
  std::vector<cplx> y(2 * n);
  for (std::size_t k = 0; k < 2 * n; ++k) {
    const double a = normal(rng);
    const double b = normal(rng);
    y[k] = std::sqrt(std::max(lam[k], 0.0) / m) * cplx(a, b);
  }
  fft::transform(y, fft::Direction::backward);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = y[k].real();
  return out;
}

// Cholesky factor of the fBm covariance at t_i = i, i = 1..n.
inline std::vector<double> fbm_cholesky(double hurst, std::size_t n, std::mt19937_64& rng) {
  Eigen::MatrixXd cov(n, n);
  const double h2 = 2.0 * hurst;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double s = static_cast<double>(i + 1);
      const double t = static_cast<double>(j + 1);
      cov(i, j) = 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
    }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("sample_fbm: circulant embedding has negative eigenvalues and the fBm covariance "
                             "matrix is not numerically positive definite");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (std::size_t i = 0; i < n; ++i) z(i) = normal(rng);
  const Eigen::VectorXd x = llt.matrixL() * z;
  return std::vector<double>(x.data(), x.data() + n);
}

}  // namespace detail

/// Exact-in-law fBm sample on the uniform grid t_i = i * horizon / steps, W(0) = 0.
inline ModulationPath sample_fbm(double hurst, std::size_t steps, double horizon, std::uint64_t seed,
                                 FbmMethod method = FbmMethod::automatic) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("sample_fbm: Hurst index must lie in (0, 1)");
  if (steps == 0) throw std::invalid_argument("sample_fbm: steps must be >= 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("sample_fbm: horizon must be > 0");
  std::mt19937_64 rng(seed);
  const double h = horizon / static_cast<double>(steps);
  const double scale = std::pow(h, hurst);
  std::vector<double> t(steps + 1), w(steps + 1, 0.0);
  for (std::size_t i = 0; i <= steps; ++i) t[i] = h * static_cast<double>(i);
  t.back() = horizon;

  std::optional<std::vector<double>> noise;
  if (method != FbmMethod::cholesky) noise = detail::fgn_circulant(hurst, steps, rng);
  if (noise) {
    for (std::size_t i = 0; i < steps; ++i) w[i + 1] = w[i] + scale * (*noise)[i];
  } else {
    if (method == FbmMethod::circulant)
      throw std::runtime_error("sample_fbm: circulant embedding is not nonnegative definite");
    rng.seed(seed);
    const auto x = detail::fbm_cholesky(hurst, steps, rng);
    for (std::size_t i = 0; i < steps; ++i) w[i + 1] = scale * x[i];
  }
  return ModulationPath(t, w, PathKind::fbm, hurst, seed);
}

// ---------------------------------------------------------------------------
// Oscillatory integrals

namespace detail {

inline double sinc(double x) {
  if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

// Exact integral of e^{i(w0 + (w1 - w0)(u - a)/(b - a)) tau} over [a, b].
inline cplx segment_phi(double a, double b, double w0, double w1, double tau) {
  const double half = 0.5 * (w1 - w0) * tau;
  const double mid = 0.5 * (w0 + w1) * tau;
  return (b - a) * sinc(half) * cplx(std::cos(mid), std::sin(mid));
}

}  // namespace detail

/// Phi_{[s,t]}(tau) = int_s^t e^{i W(u) tau} du, exact on every linear segment.
inline cplx phi_integral(const ModulationPath& path, double s, double t, double tau) {
  if (!(s <= t)) throw std::invalid_argument("phi_integral: need s <= t");
  if (!path.in_domain(s) || !path.in_domain(t)) throw std::out_of_range("phi_integral: interval outside path domain");
  if (s == t) return {};
  const auto& T = path.times();
  const auto& W = path.values();
  const std::size_t i0 = path.segment_of(s);
  const std::size_t i1 = path.segment_of(t);
  cplx sum{};
  for (std::size_t i = i0; i <= i1; ++i) {
    const double a = std::max(s, T[i]);
    const double b = std::min(t, T[i + 1]);
    if (!(b > a)) continue;
    const double wa = a == T[i] ? W[i] : path(a);
    const double wb = b == T[i + 1] ? W[i + 1] : path(b);
    sum += detail::segment_phi(a, b, wa, wb, tau);
  }
  return sum;
}

struct IrregularityQuery {
  double rho = 0.0;
  double gamma = 1.0;
  std::vector<double> tau_grid;
  std::vector<std::pair<double, double>> time_pairs;
};

struct IrregularitySample {
  double tau, s, t, value;
};

struct IrregularityResult {
  double value = 0.0;  // grid maximum: a lower bound for the supremum
  IrregularitySample argmax{};
  std::vector<IrregularitySample> samples;
};

inline IrregularityResult irregularity_functional(const ModulationPath& path, const IrregularityQuery& q,
                                                  bool keep_samples = false) {
  if (q.tau_grid.empty() || q.time_pairs.empty())
    throw std::invalid_argument("irregularity_functional: tau grid and time pairs must be nonempty");
  if (!(q.rho >= 0.0)) throw std::invalid_argument("irregularity_functional: rho must be >= 0");
  if (!(q.gamma > 0.0 && q.gamma <= 1.0)) throw std::invalid_argument("irregularity_functional: gamma must lie in (0, 1]");
  for (const auto& [s, t] : q.time_pairs)
    if (!(s < t) || !path.in_domain(s) || !path.in_domain(t))
      throw std::invalid_argument("irregularity_functional: time pair outside domain or not ordered");
  IrregularityResult r;
  bool first = true;
  for (const auto& [s, t] : q.time_pairs)
    for (double tau : q.tau_grid) {
      const double v =
          std::pow(1.0 + std::abs(tau), q.rho) * std::abs(phi_integral(path, s, t, tau)) / std::pow(t - s, q.gamma);
      if (keep_samples) r.samples.push_back({tau, s, t, v});
      if (first || v > r.value) {
        r.value = v;
        r.argmax = {tau, s, t, v};
        first = false;
      }
    }
  return r;
}

/// E[e^{i B^H_t tau}] = exp(-tau^2 t^{2H} / 2).
inline double expected_char(double hurst, double t, double tau) {
  if (!(hurst > 0.0 && hurst < 1.0) || !(t >= 0.0)) throw std::invalid_argument("expected_char: need H in (0,1), t >= 0");
  return std::exp(-0.5 * tau * tau * std::pow(t, 2.0 * hurst));
}

/// Adaptive Gauss-Kronrod value of int_0^T0 exp(-tau^2 t^{2H}/2) dt.
inline double expected_char_integral(double hurst, double T0, double tau, double rel_tol = 1e-9) {
  if (!(T0 > 0.0)) throw std::invalid_argument("expected_char_integral: T0 must be > 0");
  const double a = std::abs(tau);
  if (a == 0.0) return T0;
  auto f = [&](double t) { return std::exp(-0.5 * a * a * std::pow(t, 2.0 * hurst)); };
  // Geometric breakpoints from far below the decay scale tau^{-1/H}: on each piece [x, 2x]
  // the t^{2H} cusp at the origin is smooth relative to the piece length.
  const double scale = std::min(std::pow(a, -1.0 / hurst), T0);
  std::vector<double> pts{0.0};
  for (double x = scale * std::exp2(-40.0); x < T0; x *= 2.0) pts.push_back(x);
  pts.push_back(T0);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (f(pts[i]) < 1e-300) break;
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, pts[i], pts[i + 1], 8,
                                                                             rel_tol * 1e-2, &err);
  }
  return total;
}

struct IntegralBoundRow {
  double tau, integral, bound, ratio;
};

struct IntegralBoundReport {
  double hurst = 0.0;
  double T0 = 0.0;
  std::vector<IntegralBoundRow> rows;
  double constant = 0.0;  // max ratio over the grid
};

/// Ratios of int_0^T0 exp(-tau^2 t^{2H}/2) dt against min(tau^{-1/H}, T0).
inline IntegralBoundReport expected_char_integral_bound(double hurst, double T0, const std::vector<double>& taus) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("expected_char_integral_bound: H must lie in (0, 1)");
  if (!(T0 > 0.0)) throw std::invalid_argument("expected_char_integral_bound: T0 must be > 0");
  IntegralBoundReport r;
  r.hurst = hurst;
  r.T0 = T0;
  for (double tau : taus) {
    const double a = std::abs(tau);
    const double integral = expected_char_integral(hurst, T0, a);
    const double bound = a == 0.0 ? T0 : std::min(std::pow(a, -1.0 / hurst), T0);
    r.rows.push_back({tau, integral, bound, integral / bound});
    r.constant = std::max(r.constant, integral / bound);
  }
  return r;
}

}  // namespace modnls
