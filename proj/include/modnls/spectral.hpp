#pragma once

// Fields on T^2 = R^2 / 2 pi Z^2 stored by their Fourier coefficients,
// u(x) = sum_k u_k e^{i k.x}, u_k = (2 pi)^{-2} int e^{-i k.x} u(x) dx.
// With this pairing ||u||_{L^2}^2 = (2 pi)^2 sum_k |u_k|^2.
//
// The propagator e^{i W Delta} multiplies u_k by e^{-i W |k|^2}.

#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "modnls/common.hpp"
#include "modnls/fft.hpp"
#include "modnls/lattice.hpp"
#include "modnls/modulation.hpp"

namespace modnls {

using FourierField = BoxArray<cplx>;

/// Single mode c e^{i k.x} on the box.
inline FourierField single_mode(const FrequencyBox& box, Vec2 k, cplx c = 1.0) {
  FourierField u(box);
  u[k] = c;
  return u;
}

inline FourierField scaled(FourierField u, cplx a) {
  for (auto& v : u.data()) v *= a;
  return u;
}

/// Multiply u_k by e^{-i w |k|^2}.
inline FourierField propagate_value(FourierField u, double w) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ph = -w * static_cast<double>(u.point(i).norm2());
    u.data()[i] *= cplx(std::cos(ph), std::sin(ph));
  }
  return u;
}

inline FourierField propagate(const FourierField& u, const ModulationPath& path, double t) {
  if (!path.in_domain(t)) throw std::out_of_range("propagate: t outside the path domain");
  return propagate_value(u, path(t));
}

/// P_C u for C given as a predicate on lattice points.
inline FourierField project(FourierField u, const std::function<bool(Vec2)>& in_set) {
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!in_set(u.point(i))) u.data()[i] = 0.0;
  return u;
}

inline FourierField project(const FourierField& u, const std::set<Vec2>& points) {
  return project(u, [&](Vec2 k) { return points.count(k) > 0; });
}

inline FourierField project(const FourierField& u, const FrequencyBox& box) {
  return project(u, [&](Vec2 k) { return box.contains(k); });
}

/// Copy of u re-expressed on another box; coefficients outside `target` are dropped.
inline FourierField restrict_to(const FourierField& u, const FrequencyBox& target) {
  FourierField out(target);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = u.at(out.point(i));
  return out;
}

/// (sum_k <k>^{2s} |u_k|^2)^{1/2}, the coefficient-level Sobolev norm.
inline double weighted_l2(const FourierField& u, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = s == 0.0 ? 1.0 : std::pow(1.0 + static_cast<double>(u.point(i).norm2()), s);
    acc += w * std::norm(u.data()[i]);
  }
  return std::sqrt(acc);
}

/// ||u||_{H^s} = 2 pi (sum_k <k>^{2s} |u_k|^2)^{1/2}.
inline double hs_norm(const FourierField& u, double s) { return two_pi * weighted_l2(u, s); }

// ---------------------------------------------------------------------------
// Physical space

struct SpaceTimeGrid {
  int points = 0;  // M samples per dimension on [0, 2 pi)
  std::vector<double> times;
};

namespace detail {

inline std::size_t wrap(long k, int m) {
  const long r = k % m;
  return static_cast<std::size_t>(r < 0 ? r + m : r);
}

// samples[a * M + b] = sum_k c_k e^{i k.(x_a, y_b)}, x_a = 2 pi a / M.
inline std::vector<cplx> synthesize(const FourierField& u, int m) {
  std::vector<cplx> grid(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Vec2 k = u.point(i);
    grid[wrap(k.x, m) * static_cast<std::size_t>(m) + wrap(k.y, m)] += u.data()[i];
  }
  fft::transform2d(grid, m, m, fft::Direction::backward);
  return grid;
}

inline FourierField analyze(std::vector<cplx> grid, int m, const FrequencyBox& box) {
  fft::transform2d(grid, m, m, fft::Direction::forward);
  const double norm = 1.0 / (static_cast<double>(m) * static_cast<double>(m));
  FourierField u(box);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Vec2 k = u.point(i);
    u.data()[i] = norm * grid[wrap(k.x, m) * static_cast<std::size_t>(m) + wrap(k.y, m)];
  }
  return u;
}

}  // namespace detail

/// Samples of u on the uniform M x M grid, row-major in (x, y).
inline std::vector<cplx> evaluate_physical(const FourierField& u, int m) {
  if (m < u.box().side())
    throw std::invalid_argument("evaluate_physical: grid of " + std::to_string(m) +
                                " points is below Nyquist; need at least " + std::to_string(u.box().side()));
  return detail::synthesize(u, m);
}

/// Coefficients on `box` recovered from M x M samples by the discrete transform.
inline FourierField recover_coefficients(const std::vector<cplx>& samples, int m, const FrequencyBox& box) {
  if (samples.size() != static_cast<std::size_t>(m) * static_cast<std::size_t>(m))
    throw std::invalid_argument("recover_coefficients: sample count does not match grid");
  if (m < box.side()) throw std::invalid_argument("recover_coefficients: grid below Nyquist for the box");
  return detail::analyze(samples, m, box);
}

/// Samples of e^{i W(t) Delta} u0 at every time of the grid.
inline std::vector<std::vector<cplx>> evaluate_spacetime(const FourierField& u0, const ModulationPath& path,
                                                         const SpaceTimeGrid& grid) {
  std::vector<std::vector<cplx>> out;
  out.reserve(grid.times.size());
  for (double t : grid.times) out.push_back(evaluate_physical(propagate(u0, path, t), grid.points));
  return out;
}

/// Exact trapezoid value of int_{T^2} |u|^4 dx from M >= 4N + 1 samples.
inline double spatial_l4_fourth(const FourierField& u, int m) {
  const auto g = detail::synthesize(u, m);
  double acc = 0.0;
  for (const auto& v : g) {
    const double a = std::norm(v);
    acc += a * a;
  }
  return two_pi * two_pi * acc / (static_cast<double>(m) * static_cast<double>(m));
}

inline int l4_required_points(const FrequencyBox& box) { return static_cast<int>(4 * box.half_side + 1); }

// ---------------------------------------------------------------------------
// Space-time L^4

enum class L4Mode { exact_sum, grid };

/// (2 pi)^2 sum_Q u0(Q) int_s^t e^{-i W tau_Q}; the imaginary residue is checked, then dropped.
inline double l4_fourth_exact(const FourierField& u0, const ModulationPath& path, double s, double t) {
  const auto ls = level_sums(u0);
  cplx total{};
  double scale = 0.0;
  for (const auto& [tau, a] : ls.sums) {
    const cplx term = a * phi_integral(path, s, t, -static_cast<double>(tau));
    total += term;
    scale += std::abs(term);
  }
  total *= two_pi * two_pi;
  scale *= two_pi * two_pi;
  if (std::abs(total.imag()) > 1e-10 * std::max(scale, 1e-300))
    throw std::logic_error("l4_fourth_exact: imaginary residue above tolerance");
  return std::max(total.real(), 0.0);
}

/// Space-time quadrature of |u|^4: exact spatial sums, Simpson in time on every path
/// segment, each segment subdivided until the phase W tau moves by at most 0.1 per step.
inline double l4_fourth_grid(const FourierField& u0, const ModulationPath& path, double s, double t, int m = 0) {
  const int need = l4_required_points(u0.box());
  if (m == 0) m = fft::good_size(need);
  if (m < need)
    throw std::invalid_argument("l4_norm_spacetime: spatial grid too coarse for exact quadrature; need M >= " +
                                std::to_string(need));
  if (!(s <= t) || !path.in_domain(s) || !path.in_domain(t))
    throw std::out_of_range("l4_norm_spacetime: interval outside path domain");
  const double tau_max = 2.0 * static_cast<double>(u0.box().max_norm2());
  auto integrand = [&](double w) { return spatial_l4_fourth(propagate_value(u0, w), m); };
  const auto& T = path.times();
  double total = 0.0;
  if (s == t) return 0.0;
  for (std::size_t i = path.segment_of(s); i <= path.segment_of(t); ++i) {
    const double a = std::max(s, T[i]);
    const double b = std::min(t, T[i + 1]);
    if (!(b > a)) continue;
    const double wa = path(a);
    const double wb = path(b);
    const auto nsub = static_cast<std::size_t>(std::max(1.0, std::ceil(std::abs(wb - wa) * tau_max / 0.1)));
    const double h = (b - a) / static_cast<double>(nsub);
    double fl = integrand(wa);
    for (std::size_t k = 0; k < nsub; ++k) {
      const double x0 = static_cast<double>(k) / static_cast<double>(nsub);
      const double x1 = static_cast<double>(k + 1) / static_cast<double>(nsub);
      const double fm = integrand(wa + 0.5 * (x0 + x1) * (wb - wa));
      const double fr = integrand(k + 1 == nsub ? wb : wa + x1 * (wb - wa));
      total += h / 6.0 * (fl + 4.0 * fm + fr);
      fl = fr;
    }
  }
  return total;
}

inline double l4_norm_spacetime(const FourierField& u0, const ModulationPath& path, double s, double t,
                                L4Mode mode = L4Mode::exact_sum, int m = 0) {
  const double v = mode == L4Mode::exact_sum ? l4_fourth_exact(u0, path, s, t) : l4_fourth_grid(u0, path, s, t, m);
  return std::pow(v, 0.25);
}

// ---------------------------------------------------------------------------
// Cubic nonlinearity

/// Coefficients of |u|^2 u on `out_box` from an M x M padded transform.
/// Exact when M exceeds the spread between the output box and the tripled input box.
inline FourierField cubic_on(const FourierField& u, const FrequencyBox& out_box, int m) {
  const Vec2 c = u.box().center;
  const FrequencyBox centered({0, 0}, u.box().half_side);
  FourierField w(centered, u.data());
  auto g = detail::synthesize(w, m);
  for (auto& v : g) v *= std::norm(v);
  const FrequencyBox shifted(out_box.center - c, out_box.half_side);
  const auto r = detail::analyze(std::move(g), m, shifted);
  return FourierField(out_box, r.data());
}

/// |u|^2 u on the tripled box {center, 3N}.
inline FourierField cubic_nonlinearity(const FourierField& u) {
  const long n = u.box().half_side;
  return cubic_on(u, FrequencyBox(u.box().center, 3 * n), fft::good_size(static_cast<int>(6 * n + 1)));
}

/// P_box(|u|^2 u) on the box of u; a grid of 4N + 1 points (factor-2 padding) suffices.
inline FourierField cubic_nonlinearity_projected(const FourierField& u) {
  const long n = u.box().half_side;
  return cubic_on(u, u.box(), fft::good_size(static_cast<int>(4 * n + 1)));
}

}  // namespace modnls
