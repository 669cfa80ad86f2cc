#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <random>

#include "modnls/modulation.hpp"
#include "oracles.hpp"

using namespace modnls;

TEST(ModulationPath, ValidatesGrid) {
  EXPECT_THROW(ModulationPath({0.0, 0.0}, {0.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(ModulationPath({0.0, 1.0}, {0.0}), std::invalid_argument);
  EXPECT_THROW(ModulationPath({}, {}), std::invalid_argument);
  EXPECT_THROW(ModulationPath({0.0, 1.0}, {0.0, NAN}), std::invalid_argument);
}

TEST(ModulationPath, LinearInterpolation) {
  const ModulationPath p({0.0, 1.0, 3.0}, {0.0, 2.0, 0.0});
  EXPECT_DOUBLE_EQ(p(0.5), 1.0);
  EXPECT_DOUBLE_EQ(p(2.0), 1.0);
  EXPECT_DOUBLE_EQ(p(3.0), 0.0);
  EXPECT_THROW(p(3.5), std::out_of_range);
  EXPECT_EQ(p.segment_of(1.0), 1u);
  EXPECT_EQ(p.segment_of(3.0), 1u);
}

TEST(Fbm, StartsAtZeroAndIsDeterministic) {
  const auto a = sample_fbm(0.5, 128, 1.0, 7);
  const auto b = sample_fbm(0.5, 128, 1.0, 7);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_EQ(a.values().front(), 0.0);
  EXPECT_EQ(a.times().back(), 1.0);
  EXPECT_NE(a.values(), sample_fbm(0.5, 128, 1.0, 8).values());
}

TEST(Fbm, RejectsBadArguments) {
  EXPECT_THROW(sample_fbm(0.0, 10, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(sample_fbm(1.0, 10, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(sample_fbm(0.5, 0, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(sample_fbm(0.5, 10, -1.0, 1), std::invalid_argument);
}

TEST(Fbm, CirculantEigenvaluesNonnegative) {
  for (double h : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (double l : detail::circulant_eigenvalues(h, 256)) EXPECT_GT(l, -1e-10) << "H=" << h;
}

// Empirical variance of W(t) against t^{2H} and of increments against |t - s|^{2H}.
TEST(Fbm, CovarianceMatchesTheory) {
  const std::size_t trials = 4000;
  for (double h : {0.3, 0.5, 0.75}) {
    double v1 = 0.0, v_half = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < trials; ++i) {
      const auto p = sample_fbm(h, 32, 1.0, derive_seed(99, SeedDomain::path, i));
      v1 += p.values()[32] * p.values()[32];
      v_half += p.values()[16] * p.values()[16];
      cov += p.values()[32] * p.values()[16];
    }
    const double n = static_cast<double>(trials);
    const double exp_cov = 0.5 * (1.0 + std::pow(0.5, 2 * h) - std::pow(0.5, 2 * h));
    EXPECT_NEAR(v1 / n, 1.0, 0.08);
    EXPECT_NEAR(v_half / n, std::pow(0.5, 2 * h), 0.06);
    EXPECT_NEAR(cov / n, exp_cov, 0.06);
  }
}

TEST(Fbm, CholeskyFallbackAgreesInLaw) {
  const std::size_t trials = 3000;
  double v = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const auto p = sample_fbm(0.3, 16, 2.0, i, FbmMethod::cholesky);
    v += p.values().back() * p.values().back();
  }
  EXPECT_NEAR(v / static_cast<double>(trials), std::pow(2.0, 0.6), 0.16);
}

TEST(Phi, FreeFlowVanishesAtIntegerTau) {
  const auto p = ModulationPath::identity(two_pi);
  for (int tau = 1; tau <= 100; ++tau) EXPECT_LE(std::abs(phi_integral(p, 0.0, two_pi, tau)), 1e-12);
  EXPECT_NEAR(phi_integral(p, 0.0, two_pi, 0.0).real(), two_pi, 1e-14);
}

TEST(Phi, MatchesGaussKronrodOnRandomPaths) {
  using boost::math::quadrature::gauss_kronrod;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = sample_fbm(0.5, 20, 1.0, static_cast<std::uint64_t>(trial));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double s = u(rng), t = u(rng);
    if (s > t) std::swap(s, t);
    const double tau = 1.0 + 10.0 * u(rng);
    cplx ref{};
    // Integrate piece by piece so the quadrature sees smooth integrands.
    std::vector<double> cuts{s};
    for (double x : p.times())
      if (x > s && x < t) cuts.push_back(x);
    cuts.push_back(t);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      ref += cplx(gauss_kronrod<double, 61>::integrate([&](double x) { return std::cos(tau * p(x)); }, cuts[i], cuts[i + 1]),
                  gauss_kronrod<double, 61>::integrate([&](double x) { return std::sin(tau * p(x)); }, cuts[i], cuts[i + 1]));
    }
    EXPECT_NEAR(std::abs(phi_integral(p, s, t, tau) - ref), 0.0, 1e-12);
  }
}

TEST(Phi, SmallPhaseSeriesIsContinuous) {
  const ModulationPath p({0.0, 1.0}, {0.0, 1e-9});
  const cplx a = phi_integral(p, 0.0, 1.0, 1.0);
  EXPECT_NEAR(a.real(), 1.0, 1e-15);
  EXPECT_NEAR(a.imag(), 5e-10, 1e-18);
}

TEST(Phi, RejectsBadIntervals) {
  const auto p = ModulationPath::identity(1.0);
  EXPECT_THROW(phi_integral(p, 0.5, 0.2, 1.0), std::invalid_argument);
  EXPECT_THROW(phi_integral(p, 0.0, 2.0, 1.0), std::out_of_range);
}

TEST(Irregularity, IdentityPathDecaysLikeOneOverTau) {
  const auto p = ModulationPath::identity(1.0);
  IrregularityQuery q;
  q.rho = 1.0;
  q.gamma = 0.0 + 1e-9;
  for (int t = 1; t <= 64; ++t) q.tau_grid.push_back(t);
  q.time_pairs = {{0.0, 1.0}, {0.25, 0.5}};
  const auto r = irregularity_functional(p, q, true);
  // |int_s^t e^{i u tau}| <= 2 / tau, so (1 + tau) |...| <= 4.
  EXPECT_LE(r.value, 4.0 + 1e-9);
  EXPECT_EQ(r.samples.size(), 128u);
}

TEST(Irregularity, ConstantPathIsNotIrregular) {
  const auto p = ModulationPath::constant(1.0);
  IrregularityQuery q{0.5, 1.0, {1.0, 100.0, 10000.0}, {{0.0, 1.0}}};
  const auto r = irregularity_functional(p, q);
  EXPECT_NEAR(r.value, std::pow(10001.0, 0.5), 1e-9);
  EXPECT_EQ(r.argmax.tau, 10000.0);
}

TEST(Irregularity, ValidatesQuery) {
  const auto p = ModulationPath::identity(1.0);
  EXPECT_THROW(irregularity_functional(p, {0.0, 1.0, {}, {{0.0, 1.0}}}), std::invalid_argument);
  EXPECT_THROW(irregularity_functional(p, {0.0, 1.5, {1.0}, {{0.0, 1.0}}}), std::invalid_argument);
  EXPECT_THROW(irregularity_functional(p, {0.0, 1.0, {1.0}, {{0.5, 0.5}}}), std::invalid_argument);
}

// Lower incomplete gamma closed form of int_0^T exp(-tau^2 t^{2H} / 2) dt.
double char_integral_oracle(double H, double T0, double tau) {
  const double a = 1.0 / (2.0 * H);
  const double c = 0.5 * tau * tau;
  return std::pow(c, -a) * a * boost::math::tgamma_lower(a, c * std::pow(T0, 2.0 * H));
}

TEST(ExpectedChar, IntegralMatchesIncompleteGamma) {
  for (double H : {0.3, 0.5, 0.7})
    for (double T0 : {0.1, 1.0})
      for (int e = 0; e <= 10; ++e) {
        const double tau = std::exp2(e);
        const double ref = char_integral_oracle(H, T0, tau);
        EXPECT_NEAR(expected_char_integral(H, T0, tau), ref, 1e-9 * ref) << H << ' ' << T0 << ' ' << tau;
      }
}

TEST(ExpectedChar, BoundConstantBelowClosedForm) {
  std::vector<double> taus;
  for (int e = 0; e <= 10; ++e) taus.push_back(std::exp2(e));
  for (double H : {0.3, 0.5}) {
    const double a = 1.0 / (2.0 * H);
    const double closed = std::max(1.0, std::pow(2.0, a) * std::tgamma(1.0 + a));
    for (double T0 : {0.1, 1.0}) {
      const auto r = expected_char_integral_bound(H, T0, taus);
      EXPECT_LE(r.constant, closed);
      EXPECT_GT(r.constant, 0.0);
      for (const auto& row : r.rows) EXPECT_LE(row.integral, T0 * (1 + 1e-12));
    }
  }
}

TEST(ExpectedChar, Values) {
  EXPECT_DOUBLE_EQ(expected_char(0.5, 1.0, 0.0), 1.0);
  EXPECT_NEAR(expected_char(0.5, 1.0, 1.0), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(expected_char(0.3, 0.25, 3.0), std::exp(-4.5 * std::pow(0.25, 0.6)), 1e-15);
}
