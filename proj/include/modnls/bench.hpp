#pragma once

// Empirical Strichartz ratios: pathwise, stochastic (Monte Carlo over fBm paths),
// per-square on a tiling of frequency space, and the exact-sum versus grid check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "modnls/common.hpp"
#include "modnls/lattice.hpp"
#include "modnls/modulation.hpp"
#include "modnls/spectral.hpp"
#include "modnls/variation.hpp"

namespace modnls {

struct BenchRow {
  std::uint64_t seed = 0;
  long N = 0;
  double T0 = 0.0;
  double eps = 0.0;
  double H = 0.0;
  double ratio = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  double max = 0.0;
  double mean = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
  // Monte Carlo estimate for stochastic benches (ratio of L^4(Omega) moments).
  double estimate = 0.0;
  double standard_error = 0.0;

  void summarize() {
    if (rows.empty()) return;
    std::vector<double> r;
    for (const auto& row : rows) {
      if (!(row.ratio >= 0.0) || !std::isfinite(row.ratio)) throw std::logic_error("BenchReport: ratio not finite");
      r.push_back(row.ratio);
    }
    std::vector<double> sorted = r;
    std::sort(sorted.begin(), sorted.end());
    auto q = [&](double a) {
      const double pos = a * static_cast<double>(sorted.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
      return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    };
    max = sorted.back();
    double acc = 0.0;
    for (double v : r) acc += v;
    mean = acc / static_cast<double>(r.size());
    q05 = q(0.05);
    q50 = q(0.5);
    q95 = q(0.95);
  }
};

/// Complex Gaussian coefficients on the box.
inline FourierField random_field(const FrequencyBox& box, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  FourierField f(box);
  for (auto& v : f.data()) {
    const double a = g(rng);
    const double b = g(rng);
    v = cplx(a, b);
  }
  return f;
}

inline double l2_norm(const FourierField& f) { return hs_norm(f, 0.0); }

/// (N^{2 eps} sqrt(T0))^{1/4}.
inline double pathwise_denominator(long N, double T0, double eps) {
  return std::pow(std::pow(static_cast<double>(std::max<long>(N, 1)), 2.0 * eps) * std::sqrt(T0), 0.25);
}

/// (log(N) T0 + T0^{1 - H})^{1/4}.
inline double stochastic_denominator(long N, double T0, double H) {
  return std::pow(std::log(static_cast<double>(std::max<long>(N, 1))) * T0 + std::pow(T0, 1.0 - H), 0.25);
}

/// ||e^{i W_t Delta} P_S f||_{L^4(I x T^2)} / ((N^{2 eps} sqrt T0)^{1/4} ||f||_{L^2}), N the half-side of S.
inline double pathwise_ratio(const FourierField& f, const FrequencyBox& S, const ModulationPath& path, double s,
                             double t, double eps) {
  const double norm = l2_norm(f);
  if (norm == 0.0) throw std::invalid_argument("pathwise_ratio: zero data");
  if (!(t > s)) throw std::invalid_argument("pathwise_ratio: need a nonempty interval");
  const auto pf = project(f, S);
  return l4_norm_spacetime(pf, path, s, t) / (pathwise_denominator(S.half_side, t - s, eps) * norm);
}

/// Pathwise ratio from precomputed level sums of P_S f; used to reuse one f across many paths.
inline double pathwise_ratio_from_levels(const LevelSums& ls, double norm, long N, const ModulationPath& path,
                                         double s, double t, double eps) {
  cplx total{};
  for (const auto& [tau, a] : ls.sums) total += a * phi_integral(path, s, t, -static_cast<double>(tau));
  const double l44 = std::max(two_pi * two_pi * total.real(), 0.0);
  return std::pow(l44, 0.25) / (pathwise_denominator(N, t - s, eps) * norm);
}

struct PathwiseSweep {
  long N = 0;
  double T0 = 0.0;
  double eps = 0.0;
  double H = 0.0;
  BenchReport report;
};

/// Ratios for `data_count` random fields on {|k| <= N} times `path_count` fBm paths on [0, T0].
inline PathwiseSweep pathwise_sweep(long N, std::size_t data_count, std::size_t path_count, double T0, double eps,
                                    double H, std::uint64_t master, std::size_t path_steps = 256,
                                    unsigned workers = 1) {
  PathwiseSweep sw{N, T0, eps, H, {}};
  const FrequencyBox box({0, 0}, N);
  std::vector<ModulationPath> paths;
  for (std::size_t j = 0; j < path_count; ++j)
    paths.push_back(sample_fbm(H, path_steps, T0, derive_seed(master, SeedDomain::path, j)));
  std::vector<std::vector<BenchRow>> rows(data_count);
  parallel_for(data_count, workers, [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(master, SeedDomain::data, i);
    const auto f = random_field(box, seed);
    const auto ls = level_sums(f);
    const double norm = l2_norm(f);
    for (std::size_t j = 0; j < path_count; ++j)
      rows[i].push_back({seed, N, T0, eps, H, pathwise_ratio_from_levels(ls, norm, N, paths[j], 0.0, T0, eps)});
  });
  for (auto& r : rows) sw.report.rows.insert(sw.report.rows.end(), r.begin(), r.end());
  sw.report.summarize();
  return sw;
}

/// Monte Carlo estimate of ||e^{i B^H_t Delta} P_S f||_{L^4(Omega x I x T^2)} over
/// ((log N T0 + T0^{1-H})^{1/4} ||f||_{L^4(Omega) L^2}); data and path seeds come from disjoint domains.
inline BenchReport stochastic_ratio(const std::function<FourierField(std::uint64_t)>& f_sampler, double H,
                                    std::size_t trials, const FrequencyBox& S, double s, double t,
                                    std::uint64_t master, std::size_t path_steps = 256, unsigned workers = 1) {
  if (trials < 2) throw std::invalid_argument("stochastic_ratio: need at least 2 trials");
  if (!(t > s) || !(s >= 0.0)) throw std::invalid_argument("stochastic_ratio: need 0 <= s < t");
  const double T0 = t - s;
  const double denom = stochastic_denominator(S.half_side, T0, H);
  std::vector<double> x(trials), y(trials);
  BenchReport rep;
  rep.rows.resize(trials);
  parallel_for(trials, workers, [&](std::size_t i) {
    const std::uint64_t dseed = derive_seed(master, SeedDomain::data, i);
    const std::uint64_t pseed = derive_seed(master, SeedDomain::path, i);
    const auto f = project(f_sampler(dseed), S);
    const auto path = sample_fbm(H, path_steps, t, pseed);
    const double l2 = l2_norm(f);
    x[i] = l4_fourth_exact(f, path, s, t);
    y[i] = l2 * l2 * l2 * l2;
    const double r = y[i] > 0.0 ? std::pow(x[i] / y[i], 0.25) / denom : 0.0;
    rep.rows[i] = {pseed, S.half_side, T0, 0.0, H, r};
  });
  const double n = static_cast<double>(trials);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  if (my == 0.0) throw std::invalid_argument("stochastic_ratio: data vanish on S in every trial");
  double vxx = 0.0, vyy = 0.0, vxy = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    vxx += (x[i] - mx) * (x[i] - mx) / (n - 1.0);
    vyy += (y[i] - my) * (y[i] - my) / (n - 1.0);
    vxy += (x[i] - mx) * (y[i] - my) / (n - 1.0);
  }
  // Delta method for R = mean(x) / mean(y), then for R^{1/4} / denom.
  const double R = mx / my;
  const double var_r = std::max(0.0, (vxx - 2.0 * R * vxy + R * R * vyy) / (n * my * my));
  rep.estimate = std::pow(R, 0.25) / denom;
  rep.standard_error = R > 0.0 ? 0.25 * std::pow(R, -0.75) * std::sqrt(var_r) / denom : 0.0;
  rep.summarize();
  return rep;
}

// ---------------------------------------------------------------------------
// Square decomposition

struct SquareRow {
  Vec2 index;               // xi_0: the square is (0, N]^2 + N xi_0
  double l4 = 0.0;          // ||P_C u||_{L^4(I x T^2)}
  double y0 = 0.0;          // ||P_C u||_{Y^0(V^2)}, L^2 normalization
  double ratio = 0.0;       // l4 / ((N^{2 eps} sqrt T0)^{1/4} ||u||_{Y^0(V^2)})
  double local_ratio = 0.0; // l4 / ((N^{2 eps} sqrt T0)^{1/4} ||P_C u||_{Y^0(V^2)})
};

struct SquareReport {
  long side = 0;
  double total_y0 = 0.0;
  double max_ratio = 0.0;
  std::vector<SquareRow> squares;
};

/// Time-trapezoid space-time L^4 of a sampled trajectory; exact spatial sums per node.
inline double l4_norm_trajectory(const Trajectory& u) {
  u.validate();
  const int m = fft::good_size(l4_required_points(u.box()));
  double acc = 0.0;
  for (std::size_t n = 1; n < u.times.size(); ++n)
    acc += 0.5 * (u.times[n] - u.times[n - 1]) * (spatial_l4_fourth(u.fields[n - 1], m) + spatial_l4_fourth(u.fields[n], m));
  return std::pow(acc, 0.25);
}

inline long floor_div(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

/// Square index of k in the tiling by (0, N]^2 + N xi_0.
inline Vec2 square_of(Vec2 k, long side) { return {floor_div(k.x - 1, side), floor_div(k.y - 1, side)}; }

inline SquareReport square_decomposition_ratio(const Trajectory& u, long side, const ModulationPath& path,
                                               double eps) {
  if (side < 1 || (side & (side - 1)) != 0) throw std::invalid_argument("square_decomposition_ratio: side must be a power of two");
  u.validate();
  if (!path.in_domain(u.times.front()) || !path.in_domain(u.times.back()))
    throw std::invalid_argument("square_decomposition_ratio: trajectory grid leaves the path domain");
  SquareReport rep;
  rep.side = side;
  const double T0 = u.times.back() - u.times.front();
  if (!(T0 > 0.0)) throw std::invalid_argument("square_decomposition_ratio: need a nonempty interval");
  rep.total_y0 = two_pi * ys_vp_norm(u, path, 0.0, 2.0);
  if (rep.total_y0 == 0.0) throw std::invalid_argument("square_decomposition_ratio: zero trajectory");
  const double denom = pathwise_denominator(side, T0, eps);
  std::set<Vec2> idx;
  for (const Vec2 k : u.box().points()) idx.insert(square_of(k, side));
  for (const Vec2 xi : idx) {
    const auto in_c = [&](Vec2 k) { return square_of(k, side) == xi; };
    const auto pu = u.projected(in_c);
    SquareRow row;
    row.index = xi;
    row.y0 = two_pi * ys_vp_norm(pu, path, 0.0, 2.0);
    if (row.y0 == 0.0) continue;
    row.l4 = l4_norm_trajectory(pu);
    row.ratio = row.l4 / (denom * rep.total_y0);
    row.local_ratio = row.l4 / (denom * row.y0);
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    rep.squares.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Exact-sum versus grid

struct QuadrilinearCheck {
  double exact = 0.0;
  double grid = 0.0;
  double relative_error = 0.0;
};

inline QuadrilinearCheck quadrilinear_identity_check(const FourierField& f, const ModulationPath& path, double s,
                                                     double t) {
  if (f.box().half_side > 4) throw std::invalid_argument("quadrilinear_identity_check: box half-side must be <= 4");
  QuadrilinearCheck r;
  r.exact = l4_fourth_exact(f, path, s, t);
  r.grid = l4_fourth_grid(f, path, s, t);
  if (r.exact == 0.0) throw std::invalid_argument("quadrilinear_identity_check: exact value vanishes");
  r.relative_error = std::abs(r.grid - r.exact) / r.exact;
  return r;
}

// ---------------------------------------------------------------------------
// Extremizer search (experimental)

struct ExtremizerResult {
  double ratio = 0.0;
  FourierField f;
  std::size_t evaluations = 0;
};

/// Random-restart coordinate ascent on the pathwise ratio over fields on S.
inline ExtremizerResult extremizer_search(const FrequencyBox& S, const ModulationPath& path, double s, double t,
                                          double eps, std::size_t restarts, std::size_t sweeps, std::uint64_t master) {
  ExtremizerResult best;
  const std::vector<cplx> moves{0.0, 0.5, 2.0, cplx(0.0, 1.0), cplx(0.0, -1.0), -1.0};
  for (std::size_t r = 0; r < restarts; ++r) {
    auto f = random_field(S, derive_seed(master, SeedDomain::misc, r));
    double cur = pathwise_ratio(f, S, path, s, t, eps);
    ++best.evaluations;
    for (std::size_t sw = 0; sw < sweeps; ++sw) {
      bool improved = false;
      for (std::size_t i = 0; i < f.size(); ++i) {
        const cplx keep = f.data()[i];
        for (const cplx m : moves) {
          f.data()[i] = keep * m;
          if (l2_norm(f) == 0.0) {
            f.data()[i] = keep;
            continue;
          }
          const double v = pathwise_ratio(f, S, path, s, t, eps);
          ++best.evaluations;
          if (v > cur * (1.0 + 1e-12)) {
            cur = v;
            improved = true;
            break;
          }
          f.data()[i] = keep;
        }
      }
      if (!improved) break;
    }
    if (cur > best.ratio) {
      best.ratio = cur;
      best.f = f;
    }
  }
  return best;
}

}  // namespace modnls
