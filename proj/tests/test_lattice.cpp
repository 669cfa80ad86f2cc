#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>

#include "modnls/lattice.hpp"
#include "oracles.hpp"

using namespace modnls;

TEST(TauOf, KnownParallelogram) {
  EXPECT_EQ(tau_of({1, 0}, {0, 0}, {0, 1}, {1, 1}), 0);
  EXPECT_EQ(tau_of({2, 0}, {1, 0}, {0, 0}, {1, 0}), 2);
}

TEST(TauOf, RejectsOpenTuple) { EXPECT_THROW(tau_of({1, 0}, {0, 0}, {0, 0}, {0, 0}), std::invalid_argument); }

TEST(LevelSets, UnitBoxMatchesTripleLoop) {
  const FrequencyBox box({0, 0}, 1);
  const auto h = level_set_histogram(box);
  EXPECT_EQ(h, oracle::histogram_triple_loop(box));
  std::int64_t total = 0;
  for (const auto& [t, c] : h) total += c;
  EXPECT_EQ(total, 361);
}

TEST(LevelSets, GoldenFile) {
  std::ifstream in(std::string(MODNLS_TEST_DATA) + "/levelsets_n1.csv");
  ASSERT_TRUE(in);
  std::string line;
  std::getline(in, line);
  std::map<long, std::int64_t> golden;
  long tau;
  char comma;
  std::int64_t c;
  while (in >> tau >> comma >> c) golden[tau] = c;
  EXPECT_EQ(level_set_histogram(FrequencyBox({0, 0}, 1)), golden);
}

TEST(LevelSets, SymmetricAndEven) {
  for (long n : {1L, 2L, 3L}) {
    const auto h = level_set_histogram(FrequencyBox({0, 0}, n));
    for (const auto& [t, c] : h) {
      EXPECT_EQ(t % 2, 0) << "tau is always even on Z^2";
      ASSERT_TRUE(h.count(-t));
      EXPECT_EQ(h.at(-t), c);
    }
  }
}

TEST(LevelSets, TranslationLeavesHistogramInvariant) {
  EXPECT_EQ(level_set_histogram(FrequencyBox({0, 0}, 2)), level_set_histogram(FrequencyBox({5, -3}, 2)));
}

TEST(LevelSums, MatchTripleLoopOnRandomComplexData) {
  std::mt19937_64 rng(11);
  for (long n : {1L, 2L}) {
    const FrequencyBox box({1, -1}, n);
    FourierField f(box, oracle::random_complex(rng, box.size()));
    const auto fast = level_sums(f);
    const auto slow = oracle::level_sums_triple_loop(f);
    ASSERT_EQ(fast.sums.size(), slow.size());
    for (const auto& [t, v] : slow) EXPECT_NEAR(std::abs(fast.sums.at(t) - v), 0.0, 1e-10 * (1.0 + std::abs(v)));
  }
}

TEST(LevelSums, EnumerationIsLexicographic) {
  const auto qs = enumerate_parallelograms(FrequencyBox({0, 0}, 1));
  ASSERT_EQ(qs.size(), 361u);
  for (std::size_t i = 1; i < qs.size(); ++i) {
    const auto& a = qs[i - 1];
    const auto& b = qs[i];
    EXPECT_TRUE(std::tie(a.k1, a.k2, a.k3) < std::tie(b.k1, b.k2, b.k3));
  }
}

TEST(QuadrilinearSum, MissingWeightRejected) {
  FourierField f(FrequencyBox({0, 0}, 2));
  f[{0, 0}] = 1.0;
  f[{1, 0}] = 1.0;
  f[{2, 0}] = 1.0;
  EXPECT_THROW(quadrilinear_sum(f, {{0, 1.0}}), std::invalid_argument);
  std::map<long, cplx> w;
  for (long t = -8; t <= 8; ++t) w[t] = 1.0;
  // Sum over pair sums s of r(s)^2 with r = 1, 2, 3, 2, 1.
  EXPECT_NEAR(quadrilinear_sum(f, w).real(), 19.0, 1e-12);
}

TEST(RichLines, FourByFourGrid) {
  std::vector<Vec2> g;
  for (long x = 0; x < 4; ++x)
    for (long y = 0; y < 4; ++y) g.push_back({x, y});
  const auto lines = detect_rich_lines(g, 4);
  EXPECT_EQ(lines.size(), 10u);
  std::vector<LatticeLine> got;
  for (const auto& l : lines) got.push_back(l.line);
  EXPECT_EQ(got, oracle::rich_lines_brute(g, 4));
}

TEST(RichLines, RandomSetsMatchBruteForce) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<long> c(-4, 4);
  for (int trial = 0; trial < 50; ++trial) {
    std::set<Vec2> s;
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 20);
    while (s.size() < n) s.insert({c(rng), c(rng)});
    const std::vector<Vec2> pts(s.begin(), s.end());
    for (std::size_t thr : {2u, 3u, 4u}) {
      std::vector<LatticeLine> got;
      for (const auto& l : detect_rich_lines(pts, thr)) got.push_back(l.line);
      EXPECT_EQ(got, oracle::rich_lines_brute(pts, thr));
    }
  }
}

TEST(RichLines, ThresholdBelowTwoRejected) { EXPECT_THROW(detect_rich_lines({{0, 0}}, 1), std::invalid_argument); }

TEST(RichLines, ThresholdAboveSizeGivesNothing) {
  EXPECT_TRUE(detect_rich_lines({{0, 0}, {1, 1}}, 3).empty());
}

TEST(RichnessThreshold, Values) {
  EXPECT_EQ(richness_threshold(0, 1), 2u);
  EXPECT_EQ(richness_threshold(1, 1), 3u);
  EXPECT_EQ(richness_threshold(2, 1), 4u);
  EXPECT_EQ(richness_threshold(6, 1), 16u);
}

namespace {

LatticeFunction random_nonneg(const FrequencyBox& box, std::uint64_t seed, double zero_fraction = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LatticeFunction f(box);
  for (auto& v : f.data()) v = u(rng) < zero_fraction ? 0.0 : u(rng);
  return f;
}

}  // namespace

TEST(Decomposition, ZeroFunctionHasNoLayers) {
  const auto d = rich_line_decomposition(LatticeFunction(FrequencyBox({0, 0}, 3)), 1);
  EXPECT_TRUE(d.layers.empty());
  EXPECT_TRUE(d.terminated);
}

TEST(Decomposition, RejectsNegativeValues) {
  LatticeFunction f(FrequencyBox({0, 0}, 1));
  f[{0, 0}] = -1.0;
  EXPECT_THROW(rich_line_decomposition(f, 1), std::invalid_argument);
  EXPECT_THROW(rich_line_decomposition(LatticeFunction(FrequencyBox({0, 0}, 1)), 0), std::invalid_argument);
}

TEST(Decomposition, ExactPowerOfTwoSupportCoversEveryPoint) {
  LatticeFunction f(FrequencyBox({0, 0}, 3));
  const std::vector<Vec2> pts{{0, 0}, {1, 2}, {-3, 1}, {2, -2}};
  for (std::size_t i = 0; i < pts.size(); ++i) f[pts[i]] = 4.0 - static_cast<double>(i);
  const auto layer = decomposition_layer(f, 1);
  std::size_t covered = 0;
  for (const auto& b : layer.blocks) covered += b.initial.size();
  EXPECT_EQ(covered, 4u);
  ASSERT_EQ(layer.blocks.size(), 3u);
  EXPECT_EQ(layer.blocks[2].initial.size(), 1u);
}

TEST(Decomposition, BlocksAreDyadicAndSorted) {
  const auto f = random_nonneg(FrequencyBox({0, 0}, 4), 21);
  const auto layer = decomposition_layer(f, 1);
  double prev = 1e300;
  for (const auto& b : layer.blocks) {
    EXPECT_LE(b.initial.size(), std::size_t{1} << b.j);
    for (const Vec2 k : b.initial) {
      EXPECT_LE(f[k], prev);
      prev = f[k];
    }
    EXPECT_DOUBLE_EQ(b.lambda, std::exp2(0.5 * b.j) * b.head);
  }
}

// Property: f = h_0 + h_1 + ... exactly, and g dominates h pointwise.
TEST(Decomposition, LayersSumToInputAndGDominatesH) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = random_nonneg(FrequencyBox({0, 0}, 5), seed, 0.3);
    const auto d = rich_line_decomposition_auto(f);
    LatticeFunction sum(f.box());
    for (const auto& layer : d.layers)
      for (std::size_t i = 0; i < f.size(); ++i) {
        sum.data()[i] += layer.h.data()[i];
        EXPECT_GE(layer.g.data()[i], layer.h.data()[i]);
        EXPECT_GE(layer.h.data()[i], 0.0);
      }
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_DOUBLE_EQ(sum.data()[i], f.data()[i]);
    EXPECT_TRUE(d.terminated);
  }
}

// Point set with a forced exceptional point: block 6 contains a full row and a full column.
TEST(Decomposition, CrossProducesExceptionalPoint) {
  const FrequencyBox box({0, 0}, 16);
  LatticeFunction f(box);
  std::vector<Vec2> big;
  for (long x = -16; x <= 16 && big.size() < 63; ++x)
    for (long y = -16; y <= -13 && big.size() < 63; ++y) big.push_back({x, y});
  double v = 1000.0;
  for (const Vec2 k : big) f[k] = v--;
  std::vector<Vec2> block;
  for (long x = -8; x <= 8; ++x) block.push_back({x, 0});
  for (long y = -8; y <= 8; ++y)
    if (y != 0) block.push_back({0, y});
  for (long x = 8; x <= 15 && block.size() < 64; ++x)
    for (long y = 8; y <= 12 && block.size() < 64; ++y) block.push_back({x, y});
  ASSERT_EQ(block.size(), 64u);
  for (const Vec2 k : block) f[k] = 1.0;
  const auto layer = decomposition_layer(f, 1);
  ASSERT_GE(layer.blocks.size(), 7u);
  const auto& b6 = layer.blocks[6];
  EXPECT_EQ(b6.threshold, 16u);
  ASSERT_EQ(b6.exceptional.size(), 1u);
  EXPECT_EQ(b6.exceptional[0], (Vec2{0, 0}));
  EXPECT_DOUBLE_EQ(layer.next_norm, 1.0);
}

TEST(Decomposition, AutoSelectionHalvesOnRandomBoxes) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto d = rich_line_decomposition_auto(random_nonneg(FrequencyBox({8, 8}, 8), seed));
    EXPECT_TRUE(d.halving);
    EXPECT_TRUE(d.terminated);
    EXPECT_EQ(d.tried.back(), d.C);
  }
}

TEST(Prop31, SingleBlockRatiosAreFinite) {
  const auto f = random_nonneg(FrequencyBox({0, 0}, 3), 5);
  const auto d = rich_line_decomposition_auto(f);
  ASSERT_FALSE(d.layers.empty());
  const auto g = LayeredFunction::from_layer(d.layers.front(), d.C);
  const auto r = verify_prop31(g);
  EXPECT_TRUE(r.condition_holds);
  EXPECT_TRUE(std::isfinite(r.resonant_ratio));
  EXPECT_TRUE(std::isfinite(r.dyadic_ratio));
  EXPECT_GT(r.resonant_ratio, 0.0);
}

TEST(Prop31, ViolationReported) {
  LayeredFunction g;
  g.box = FrequencyBox({0, 0}, 8);
  g.C = 1;
  std::vector<Vec2> block;
  for (long x = -4; x <= 4; ++x) block.push_back({x, 0});
  for (long y = -4; y <= 4; ++y)
    if (y != 0) block.push_back({0, y});
  // 17 points as block j = 4 (threshold ceil(2^3) = 8).
  g.blocks = {{{7, 7}}, {{7, 6}}, {{7, 5}}, {{7, 4}}, block};
  g.lambda = {1, 1, 1, 1, 1};
  const auto r = verify_prop31(g);
  EXPECT_FALSE(r.condition_holds);
  EXPECT_EQ(r.violations, std::vector<Vec2>({{0, 0}}));
}
