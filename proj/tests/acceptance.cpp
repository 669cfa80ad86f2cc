// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance [--criterion N]... [--seed S]

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "modnls/modnls.hpp"
#include "oracles.hpp"

using namespace modnls;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::uint64_t g_seed = 20240601;

Outcome quadrilinear_identity() {
  std::vector<ModulationPath> paths{ModulationPath::identity(1.0, 1)};
  for (std::uint64_t j = 0; j < 4; ++j) paths.push_back(sample_fbm(0.5, 1000, 1.0, derive_seed(g_seed, SeedDomain::path, j)));
  const FrequencyBox box({0, 0}, 2);
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto f = random_field(box, derive_seed(g_seed, SeedDomain::data, i));
    for (const auto& p : paths) worst = std::max(worst, quadrilinear_identity_check(f, p, 0.0, 1.0).relative_error);
  }
  return {worst <= 1e-6, "max relative error " + fmt("%.3e", worst) + " (tol 1e-6)"};
}

Outcome free_flow_vanishing() {
  const auto path = ModulationPath::identity(two_pi, 1);
  double worst = 0.0;
  for (int tau = 1; tau <= 100; ++tau) worst = std::max(worst, std::abs(phi_integral(path, 0.0, two_pi, tau)));
  return {worst <= 1e-12, "max |Phi| " + fmt("%.3e", worst) + " (tol 1e-12)"};
}

Outcome characteristic_function() {
  const std::size_t samples = 10000;
  bool ok = true;
  double worst = 0.0;
  for (double H : {0.3, 0.5}) {
    std::vector<double> w25(samples), w1(samples);
    for (std::size_t i = 0; i < samples; ++i) {
      const auto p = sample_fbm(H, 64, 1.0, derive_seed(g_seed, SeedDomain::path, i));
      w25[i] = p.values()[16];
      w1[i] = p.values()[64];
    }
    for (double t : {0.25, 1.0})
      for (double tau : {1.0, 3.0}) {
        const auto& w = t == 1.0 ? w1 : w25;
        double mr = 0.0, mi = 0.0, sr = 0.0, si = 0.0;
        for (double x : w) {
          mr += std::cos(tau * x);
          mi += std::sin(tau * x);
        }
        const double n = static_cast<double>(samples);
        mr /= n;
        mi /= n;
        for (double x : w) {
          sr += (std::cos(tau * x) - mr) * (std::cos(tau * x) - mr);
          si += (std::sin(tau * x) - mi) * (std::sin(tau * x) - mi);
        }
        const double se_r = std::sqrt(sr / (n - 1.0) / n);
        const double se_i = std::sqrt(si / (n - 1.0) / n);
        const double zr = std::abs(mr - expected_char(H, t, tau)) / se_r;
        const double zi = std::abs(mi) / se_i;
        worst = std::max({worst, zr, zi});
        ok = ok && zr <= 3.0 && zi <= 3.0;
      }
  }
  return {ok, "max deviation " + fmt("%.2f", worst) + " standard errors (tol 3)"};
}

Outcome integral_bound() {
  std::vector<double> taus;
  for (int e = 0; e <= 10; ++e) taus.push_back(std::exp2(e));
  bool ok = true;
  std::string d;
  for (double H : {0.3, 0.5, 0.7}) {
    double c = 0.0;
    for (double T0 : {0.1, 1.0}) c = std::max(c, expected_char_integral_bound(H, T0, taus).constant);
    const double k = 1.0 / (2.0 * H);
    const double closed = std::max(1.0, std::pow(2.0, k) * std::tgamma(1.0 + k));
    ok = ok && std::isfinite(c) && c <= closed * (1.0 + 1e-9);
    d += "C_" + fmt("%.1f", H) + "=" + fmt("%.4f", c) + " (<= " + fmt("%.4f", closed) + ") ";
  }
  return {ok, d};
}

Outcome decomposition_halving() {
  const FrequencyBox box({8, 8}, 8);  // functions live on [0, 15]^2
  std::mt19937_64 rng(derive_seed(g_seed, SeedDomain::data, 5));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool ok = true;
  int max_c = 0;
  std::size_t layers = 0;
  for (int i = 0; i < 20; ++i) {
    LatticeFunction f(box);
    for (long x = 0; x < 16; ++x)
      for (long y = 0; y < 16; ++y) f[{x, y}] = u(rng);
    const auto d = rich_line_decomposition_auto(f);
    max_c = std::max(max_c, d.C);
    layers = std::max(layers, d.layers.size());
    ok = ok && d.halving && d.terminated;
    for (const auto& layer : d.layers) {
      std::vector<std::vector<Vec2>> blocks;
      for (const auto& b : layer.blocks) blocks.push_back(b.pruned);
      ok = ok && layer.ratio <= 0.5 && one_rich_line_violations(blocks, d.C).empty();
    }
  }
  return {ok, "largest selected C " + std::to_string(max_c) + ", at most " + std::to_string(layers) + " layers"};
}

Outcome rich_line_golden() {
  std::vector<Vec2> grid;
  for (long x = 0; x < 4; ++x)
    for (long y = 0; y < 4; ++y) grid.push_back({x, y});
  const auto lines = detect_rich_lines(grid, 4);
  std::ifstream in(std::string(MODNLS_TEST_DATA) + "/rich_lines_4x4.csv");
  std::string line;
  std::getline(in, line);
  std::vector<LatticeLine> golden;
  while (std::getline(in, line)) {
    LatticeLine l;
    char c1, c2;
    std::istringstream ss(line);
    ss >> l.p >> c1 >> l.q >> c2 >> l.r;
    golden.push_back(l);
  }
  bool same = lines.size() == golden.size() && golden.size() == 10;
  for (std::size_t i = 0; same && i < lines.size(); ++i) same = lines[i].line == golden[i];
  same = same && oracle::rich_lines_brute(grid, 4) == golden;
  return {same, std::to_string(lines.size()) + " lines, golden " + std::to_string(golden.size())};
}

Outcome vp_oracle() {
  std::mt19937_64 rng(derive_seed(g_seed, SeedDomain::misc, 7));
  std::uniform_int_distribution<std::size_t> len(1, 12);
  int mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t m = len(rng);
    const SampledSignal sig(oracle::random_times(rng, m, 1.0), oracle::random_complex(rng, m));
    for (double p : {1.5, 2.0, 3.0})
      if (vp_norm(sig, p) != oracle::vp_norm_brute(sig.values, p)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in 600 comparisons (exact equality)"};
}

Outcome embedding() {
  std::mt19937_64 rng(derive_seed(g_seed, SeedDomain::misc, 8));
  std::uniform_int_distribution<std::size_t> len(2, 10);
  const FrequencyBox box({0, 0}, 2);
  double worst = -1e300;
  for (int i = 0; i < 100; ++i) {
    const std::size_t m = len(rng);
    const auto times = oracle::random_times(rng, m, 1.0);
    std::vector<FourierField> fields;
    for (std::size_t n = 0; n < m; ++n) fields.emplace_back(box, oracle::random_complex(rng, box.size()));
    const Trajectory u(times, fields);
    const auto path = sample_fbm(0.5, 64, 1.0, derive_seed(g_seed, SeedDomain::path, 100 + i));
    for (double s : {0.0, 0.5}) worst = std::max(worst, vpw_hs_norm(u, path, s, 2.0) - ys_vp_norm(u, path, s, 2.0));
  }
  return {worst <= 1e-9, "max(vpw - ys) = " + fmt("%.3e", worst) + " (tol 1e-9)"};
}

Outcome mass_conservation() {
  SolverConfig cfg;
  cfg.N_freq = 8;
  cfg.s = 0.5;
  cfg.T = 0.1;
  cfg.fixed_point_tol = 1e-24;
  cfg.max_iterations = 20;
  auto u0 = random_field(cfg.box(), derive_seed(g_seed, SeedDomain::data, 9));
  u0 = scaled(u0, 1e-2 / hs_norm(u0, cfg.s));
  // One path on the fine grid so that both runs see the same modulation.
  const auto path = sample_fbm(0.5, 2000, 0.1, derive_seed(g_seed, SeedDomain::path, 9));
  cfg.dt = 1e-4;
  const auto a = picard_solve(u0, path, cfg);
  cfg.dt = 5e-5;
  const auto b = picard_solve(u0, path, cfg);
  const double da = mass_drift(a);
  const double db = mass_drift(b);
  const double shrink = db > 0.0 ? da / db : 0.0;
  const bool ok = a.converged && b.converged && da <= 1e-5 && shrink >= 3.0;
  return {ok, "drift " + fmt("%.3e", da) + " at dt=1e-4, " + fmt("%.3e", db) + " at dt=5e-5, shrink " +
                  fmt("%.2f", shrink) + "x (need <= 1e-5 and >= 3x)"};
}

Outcome contraction_scaling() {
  bool ok = true;
  double lo = 1e300, hi = 0.0;
  const auto path = ModulationPath::identity(1.0, 1);
  for (int i = 0; i < 10; ++i) {
    SolverConfig cfg;
    cfg.N_freq = 8;
    cfg.s = 0.5;
    cfg.dt = 1e-3;
    auto u0 = random_field(cfg.box(), derive_seed(g_seed, SeedDomain::data, 100 + i));
    u0 = scaled(u0, 1e-2 / hs_norm(u0, cfg.s));
    cfg.beta = 1.0;
    const double f1 = first_contraction_factor(u0, path, cfg);
    cfg.beta = 0.5;
    const double f2 = first_contraction_factor(u0, path, cfg);
    const double r = f2 / f1;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    ok = ok && f2 < f1 && r >= 0.5 && r <= 0.9;
  }
  return {ok, "factor ratios in [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "] (window [0.5, 0.9])"};
}

Outcome pathwise_strichartz() {
  const double eps = 0.1;
  const double limit = std::pow(2.0, eps / 2.0) * 1.5;
  double prev = 0.0;
  bool ok = true;
  std::string d;
  for (long N : {2L, 4L, 8L}) {
    const auto sw = pathwise_sweep(N, 100, 10, 0.1, eps, 0.5, g_seed);
    const double m = sw.report.max;
    ok = ok && std::isfinite(m);
    d += "N=" + std::to_string(N) + " max " + fmt("%.4f", m);
    if (prev > 0.0) {
      ok = ok && m / prev <= limit;
      d += " growth " + fmt("%.4f", m / prev);
    }
    d += "; ";
    prev = m;
  }
  return {ok, d + "limit " + fmt("%.4f", limit)};
}

Outcome linear_flow() {
  const FrequencyBox box({0, 0}, 8);
  FourierField u0(box);
  for (std::size_t i = 0; i < box.size(); ++i) u0.data()[i] = std::pow(japanese(box.point(i)), -4.0);
  const std::vector<double> deltas{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> mean(deltas.size());
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto p = sample_fbm(0.5, 1024, 0.1, derive_seed(g_seed, SeedDomain::path, 1000 + s));
    const auto rows = linear_flow_convergence(u0, p, deltas);
    for (std::size_t j = 0; j < rows.size(); ++j) mean[j] += rows[j].value / 100.0;
  }
  bool decreasing = true;
  for (std::size_t j = 1; j < mean.size(); ++j) decreasing = decreasing && mean[j] < mean[j - 1];
  const bool small = mean.back() <= 1e-2;
  std::string d = "means";
  for (double m : mean) d += " " + fmt("%.4f", m);
  d += std::string("; decreasing ") + (decreasing ? "yes" : "no") + ", smallest-delta mean " + fmt("%.4f", mean.back()) +
       " vs 1e-2 (" + (small ? "met" : "not met") + ")";
  return {decreasing && small, d};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  app.add_option("--criterion", only, "criterion number (repeatable); default all")->check(CLI::Range(1, 12));
  app.add_option("--seed", g_seed, "master seed");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "quadrilinear identity", quadrilinear_identity},
      {2, "free-flow vanishing", free_flow_vanishing},
      {3, "stochastic characteristic function", characteristic_function},
      {4, "integral bound", integral_bound},
      {5, "decomposition halving", decomposition_halving},
      {6, "rich-line golden test", rich_line_golden},
      {7, "V^p oracle equivalence", vp_oracle},
      {8, "embedding inequality", embedding},
      {9, "mass conservation", mass_conservation},
      {10, "contraction scaling", contraction_scaling},
      {11, "pathwise Strichartz boundedness", pathwise_strichartz},
      {12, "linear-flow convergence", linear_flow},
  };
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("AC%-2d %s  %s: %s [%.1fs]\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
