#pragma once

// Parallelograms in Z^2, their resonance levels, rich lines, and the layered
// rich-line decomposition of nonnegative lattice functions.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "modnls/common.hpp"

namespace modnls {

/// Square {xi : |xi_1 - a| <= N, |xi_2 - b| <= N}.
struct FrequencyBox {
  Vec2 center{};
  long half_side = 0;

  FrequencyBox() = default;
  FrequencyBox(Vec2 c, long n) : center(c), half_side(n) {
    if (n < 0) throw std::invalid_argument("FrequencyBox: half_side must be nonnegative");
  }

  long side() const { return 2 * half_side + 1; }
  std::size_t size() const { return static_cast<std::size_t>(side() * side()); }

  bool contains(Vec2 k) const {
    return std::abs(k.x - center.x) <= half_side && std::abs(k.y - center.y) <= half_side;
  }

  // Row-major in (x, y); this is also the lexicographic order of the points.
  std::size_t index(Vec2 k) const {
    return static_cast<std::size_t>((k.x - center.x + half_side) * side() + (k.y - center.y + half_side));
  }
  Vec2 point(std::size_t i) const {
    const long s = side();
    const long ix = static_cast<long>(i) / s;
    const long iy = static_cast<long>(i) % s;
    return {center.x - half_side + ix, center.y - half_side + iy};
  }

  std::vector<Vec2> points() const {
    std::vector<Vec2> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = point(i);
    return out;
  }

  /// Largest |k|^2 over the box.
  long max_norm2() const {
    const long mx = std::abs(center.x) + half_side;
    const long my = std::abs(center.y) + half_side;
    return mx * mx + my * my;
  }

  friend bool operator==(const FrequencyBox&, const FrequencyBox&) = default;
};

/// Values of type T on the points of a FrequencyBox; zero outside.
template <class T>
class BoxArray {
 public:
  BoxArray() = default;
  explicit BoxArray(FrequencyBox box) : box_(box), data_(box.size(), T{}) {}
  BoxArray(FrequencyBox box, std::vector<T> data) : box_(box), data_(std::move(data)) {
    if (data_.size() != box_.size()) throw std::invalid_argument("BoxArray: data size does not match box");
  }

  const FrequencyBox& box() const { return box_; }
  std::size_t size() const { return data_.size(); }

  T at(Vec2 k) const { return box_.contains(k) ? data_[box_.index(k)] : T{}; }
  T& operator[](Vec2 k) {
    if (!box_.contains(k)) throw std::out_of_range("BoxArray: point outside box");
    return data_[box_.index(k)];
  }
  const T& operator[](Vec2 k) const {
    if (!box_.contains(k)) throw std::out_of_range("BoxArray: point outside box");
    return data_[box_.index(k)];
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }
  Vec2 point(std::size_t i) const { return box_.point(i); }

 private:
  FrequencyBox box_{};
  std::vector<T> data_;
};

using LatticeFunction = BoxArray<double>;

struct Parallelogram {
  Vec2 k1, k2, k3, k4;
  long tau = 0;
};

/// Resonance level |k1|^2 - |k2|^2 + |k3|^2 - |k4|^2. Rejects tuples that do not close.
inline long tau_of(Vec2 k1, Vec2 k2, Vec2 k3, Vec2 k4) {
  if (k1 - k2 + k3 - k4 != Vec2{0, 0})
    throw std::invalid_argument("tau_of: vertices violate k1 - k2 + k3 - k4 = 0");
  return k1.norm2() - k2.norm2() + k3.norm2() - k4.norm2();
}

/// Visits every parallelogram with vertices in the box, (k1, k2, k3) lexicographic and
/// k4 forced. With shards > 1 only k1 indices congruent to `shard` are visited.
template <class Fn>
void for_each_parallelogram(const FrequencyBox& box, Fn&& fn, std::size_t shard = 0, std::size_t shards = 1) {
  const std::size_t n = box.size();
  for (std::size_t i1 = shard; i1 < n; i1 += shards) {
    const Vec2 k1 = box.point(i1);
    for (std::size_t i2 = 0; i2 < n; ++i2) {
      const Vec2 k2 = box.point(i2);
      for (std::size_t i3 = 0; i3 < n; ++i3) {
        const Vec2 k3 = box.point(i3);
        const Vec2 k4 = k1 - k2 + k3;
        if (!box.contains(k4)) continue;
        fn(Parallelogram{k1, k2, k3, k4, k1.norm2() - k2.norm2() + k3.norm2() - k4.norm2()});
      }
    }
  }
}

inline std::vector<Parallelogram> enumerate_parallelograms(const FrequencyBox& box) {
  std::vector<Parallelogram> out;
  for_each_parallelogram(box, [&](const Parallelogram& q) { out.push_back(q); });
  return out;
}

/// Per-level parallelogram counts and quadrilinear sums of a lattice function.
struct LevelSums {
  std::map<long, std::int64_t> counts;
  std::map<long, cplx> sums;
};

// Groups (k1, k3) and (k2, k4) by the common sum s = k1 + k3 = k2 + k4 and by the
// partial energy e = |k1|^2 + |k3|^2; then tau = e - e' and f(Q) = f1 f3 conj(f2 f4).
inline LevelSums level_sums(const std::vector<Vec2>& pts, const std::vector<cplx>& vals) {
  struct Entry {
    Vec2 s;
    long e;
    cplx v;
    std::int64_t c;
  };
  std::vector<Entry> pairs;
  pairs.reserve(pts.size() * pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      pairs.push_back({pts[i] + pts[j], pts[i].norm2() + pts[j].norm2(), vals[i] * vals[j], 1});
  std::sort(pairs.begin(), pairs.end(), [](const Entry& a, const Entry& b) {
    return a.s != b.s ? a.s < b.s : a.e < b.e;
  });
  std::vector<Entry> merged;
  for (const auto& p : pairs) {
    if (!merged.empty() && merged.back().s == p.s && merged.back().e == p.e) {
      merged.back().v += p.v;
      merged.back().c += p.c;
    } else {
      merged.push_back(p);
    }
  }
  LevelSums out;
  std::size_t lo = 0;
  while (lo < merged.size()) {
    std::size_t hi = lo;
    while (hi < merged.size() && merged[hi].s == merged[lo].s) ++hi;
    for (std::size_t a = lo; a < hi; ++a)
      for (std::size_t b = lo; b < hi; ++b) {
        const long tau = merged[a].e - merged[b].e;
        out.counts[tau] += merged[a].c * merged[b].c;
        out.sums[tau] += merged[a].v * std::conj(merged[b].v);
      }
    lo = hi;
  }
  return out;
}

/// Level sums over the support of f (points where f is nonzero).
template <class T>
LevelSums level_sums(const BoxArray<T>& f) {
  std::vector<Vec2> pts;
  std::vector<cplx> vals;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const cplx v = static_cast<cplx>(f.data()[i]);
    if (v != cplx{}) {
      pts.push_back(f.point(i));
      vals.push_back(v);
    }
  }
  return level_sums(pts, vals);
}

/// Histogram tau -> number of parallelograms with all vertices in the box.
inline std::map<long, std::int64_t> level_set_histogram(const FrequencyBox& box) {
  const auto pts = box.points();
  return level_sums(pts, std::vector<cplx>(pts.size(), cplx{1.0})).counts;
}

/// sum_tau weight(tau) sum_{Q in Q^tau} f(k1) conj(f(k2)) f(k3) conj(f(k4)).
template <class T>
cplx quadrilinear_sum(const BoxArray<T>& f, const std::map<long, cplx>& weight) {
  const auto ls = level_sums(f);
  cplx total{};
  for (const auto& [tau, s] : ls.sums) {
    const auto it = weight.find(tau);
    if (it == weight.end())
      throw std::invalid_argument("quadrilinear_sum: no weight for occurring level tau = " + std::to_string(tau));
    total += it->second * s;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Rich lines

/// Line p x + q y = r with gcd(p, q) = 1 and p > 0 or (p = 0, q > 0).
struct LatticeLine {
  long p = 0;
  long q = 0;
  long r = 0;

  static LatticeLine through(Vec2 a, Vec2 b) {
    if (a == b) throw std::invalid_argument("LatticeLine: points coincide");
    long p = b.y - a.y;
    long q = a.x - b.x;
    const long g = std::gcd(p, q);
    p /= g;
    q /= g;
    if (p < 0 || (p == 0 && q < 0)) {
      p = -p;
      q = -q;
    }
    return {p, q, p * a.x + q * a.y};
  }

  bool contains(Vec2 k) const { return p * k.x + q * k.y == r; }

  friend bool operator==(const LatticeLine&, const LatticeLine&) = default;
  friend auto operator<=>(const LatticeLine&, const LatticeLine&) = default;
};

struct RichLine {
  LatticeLine line;
  std::size_t count = 0;
};

/// Every line meeting `points` in at least `threshold` points, each reported once.
inline std::vector<RichLine> detect_rich_lines(std::vector<Vec2> points, std::size_t threshold) {
  if (threshold < 2) throw std::invalid_argument("detect_rich_lines: threshold must be >= 2");
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  std::vector<RichLine> out;
  if (points.size() < threshold) return out;
  struct Dir {
    long dx, dy;
    std::size_t j;
  };
  std::vector<Dir> dirs;
  for (std::size_t i = 0; i < points.size(); ++i) {
    dirs.clear();
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j == i) continue;
      long dx = points[j].x - points[i].x;
      long dy = points[j].y - points[i].y;
      const long g = std::gcd(dx, dy);
      dx /= g;
      dy /= g;
      if (dx < 0 || (dx == 0 && dy < 0)) {
        dx = -dx;
        dy = -dy;
      }
      dirs.push_back({dx, dy, j});
    }
    std::sort(dirs.begin(), dirs.end(), [](const Dir& a, const Dir& b) {
      return a.dx != b.dx ? a.dx < b.dx : (a.dy != b.dy ? a.dy < b.dy : a.j < b.j);
    });
    std::size_t lo = 0;
    while (lo < dirs.size()) {
      std::size_t hi = lo;
      while (hi < dirs.size() && dirs[hi].dx == dirs[lo].dx && dirs[hi].dy == dirs[lo].dy) ++hi;
      // Report the line from its smallest point only; dirs[lo].j is the smallest other index.
      if (hi - lo + 1 >= threshold && dirs[lo].j > i)
        out.push_back({LatticeLine::through(points[i], points[dirs[lo].j]), hi - lo + 1});
      lo = hi;
    }
  }
  std::sort(out.begin(), out.end(), [](const RichLine& a, const RichLine& b) { return a.line < b.line; });
  return out;
}

/// Integer threshold ceil(2^{j/2 + C}) for block j; saturates for huge exponents.
inline std::size_t richness_threshold(int j, int C) {
  const double t = std::ceil(std::exp2(0.5 * j + C));
  if (t >= 1e18) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(t);
}

/// Points of `pts` lying on at least two lines that meet `pts` in >= threshold points.
inline std::vector<Vec2> rich_intersections(const std::vector<Vec2>& pts, std::size_t threshold) {
  std::vector<Vec2> out;
  if (threshold == std::numeric_limits<std::size_t>::max() || pts.size() < threshold) return out;
  const auto lines = detect_rich_lines(pts, std::max<std::size_t>(threshold, 2));
  if (lines.size() < 2) return out;
  for (const Vec2 k : pts) {
    int through = 0;
    for (const auto& l : lines)
      if (l.line.contains(k) && ++through >= 2) break;
    if (through >= 2) out.push_back(k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Layered decomposition

struct DecompositionBlock {
  int j = 0;
  std::vector<Vec2> initial;      // S_j^0, in sorted order
  std::vector<Vec2> exceptional;  // E_j
  std::vector<Vec2> pruned;       // S_j = S_j^0 \ E_j
  double head = 0.0;              // f_n at the first point of S_j^0
  double lambda = 0.0;            // 2^{j/2} * head
  std::size_t threshold = 0;      // ceil(2^{j/2 + C})
};

struct DecompositionLayer {
  LatticeFunction f;  // f_n
  LatticeFunction g;  // sum_j lambda_j 2^{-j/2} 1_{S_j}
  LatticeFunction h;  // f_n - f_{n+1}
  std::vector<DecompositionBlock> blocks;
  double norm = 0.0;       // ||f_n||_2
  double next_norm = 0.0;  // ||f_{n+1}||_2
  double ratio = 0.0;      // next_norm / norm
};

struct Decomposition {
  int C = 1;
  std::vector<DecompositionLayer> layers;
  LatticeFunction residual;  // f after the last layer
  bool terminated = false;   // residual is identically zero
  bool halving = false;      // every layer has ratio <= 1/2
  std::vector<int> tried;    // values of C attempted (auto selection)
};

inline double l2_norm(const LatticeFunction& f) {
  double s = 0.0;
  for (double v : f.data()) s += v * v;
  return std::sqrt(s);
}

/// Points of the support sorted by value descending, ties broken lexicographically.
inline std::vector<Vec2> sorted_support(const LatticeFunction& f) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.data()[i] > 0.0) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return f.data()[a] > f.data()[b]; });
  std::vector<Vec2> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = f.point(idx[i]);
  return out;
}

/// One layer: dyadic blocks of the sorted support, their rich intersections, and g, h.
inline DecompositionLayer decomposition_layer(const LatticeFunction& f, int C) {
  DecompositionLayer layer;
  layer.f = f;
  layer.g = LatticeFunction(f.box());
  layer.h = LatticeFunction(f.box());
  LatticeFunction next(f.box());
  const auto order = sorted_support(f);
  const std::size_t n = order.size();
  for (int j = 0;; ++j) {
    const std::size_t start = (std::size_t{1} << j) - 1;
    if (start >= n) break;
    const std::size_t stop = std::min(n, (std::size_t{1} << (j + 1)) - 1);
    DecompositionBlock b;
    b.j = j;
    b.initial.assign(order.begin() + static_cast<long>(start), order.begin() + static_cast<long>(stop));
    b.head = f[b.initial.front()];
    b.lambda = std::exp2(0.5 * j) * b.head;
    b.threshold = richness_threshold(j, C);
    b.exceptional = rich_intersections(b.initial, b.threshold);
    std::vector<Vec2> ex = b.exceptional;
    std::sort(ex.begin(), ex.end());
    for (const Vec2 k : b.initial) {
      if (std::binary_search(ex.begin(), ex.end(), k)) {
        next[k] = f[k];
      } else {
        b.pruned.push_back(k);
        layer.g[k] = b.head;
        layer.h[k] = f[k];
      }
    }
    layer.blocks.push_back(std::move(b));
  }
  layer.norm = l2_norm(f);
  layer.next_norm = l2_norm(next);
  layer.ratio = layer.norm > 0.0 ? layer.next_norm / layer.norm : 0.0;
  return layer;
}

/// Decomposition with a fixed richness constant C; stops when f_n vanishes or at max_layers.
inline Decomposition rich_line_decomposition(const LatticeFunction& f, int C, int max_layers = 64) {
  if (C < 1) throw std::invalid_argument("rich_line_decomposition: C must be >= 1");
  for (double v : f.data())
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("rich_line_decomposition: values must be finite and nonnegative");
  Decomposition d;
  d.C = C;
  d.tried = {C};
  LatticeFunction cur = f;
  d.halving = true;
  for (int n = 0; n < max_layers && l2_norm(cur) > 0.0; ++n) {
    auto layer = decomposition_layer(cur, C);
    LatticeFunction next(f.box());
    for (std::size_t i = 0; i < cur.size(); ++i) next.data()[i] = cur.data()[i] - layer.h.data()[i];
    if (layer.ratio > 0.5) d.halving = false;
    d.layers.push_back(std::move(layer));
    cur = std::move(next);
  }
  d.terminated = l2_norm(cur) == 0.0;
  d.residual = std::move(cur);
  return d;
}

/// Starts at C = 1 and doubles until every layer halves the l2 norm.
inline Decomposition rich_line_decomposition_auto(const LatticeFunction& f, int max_layers = 64) {
  std::vector<int> tried;
  for (int C = 1;; C *= 2) {
    auto d = rich_line_decomposition(f, C, max_layers);
    tried.push_back(C);
    // Once 2^C exceeds the support no block has a rich line, so this terminates.
    if ((d.halving && d.terminated) || C >= 62) {
      d.tried = tried;
      return d;
    }
  }
}

// ---------------------------------------------------------------------------
// Bilinear-sum check for layered functions

/// g = sum_j lambda_j 2^{-j/2} 1_{S_j} with disjoint blocks.
struct LayeredFunction {
  FrequencyBox box;
  std::vector<std::vector<Vec2>> blocks;
  std::vector<double> lambda;
  int C = 1;

  static LayeredFunction from_layer(const DecompositionLayer& layer, int C) {
    LayeredFunction g;
    g.box = layer.f.box();
    g.C = C;
    for (const auto& b : layer.blocks) {
      g.blocks.push_back(b.pruned);
      g.lambda.push_back(b.lambda);
    }
    return g;
  }

  LatticeFunction values() const {
    LatticeFunction out(box);
    for (std::size_t j = 0; j < blocks.size(); ++j)
      for (const Vec2 k : blocks[j]) out[k] = lambda[j] * std::exp2(-0.5 * static_cast<double>(j));
    return out;
  }
};

struct Prop31Report {
  double resonant_ratio = 0.0;  // sum_{Q in Q^0} g(Q) / (m ||lambda||^4)
  double dyadic_ratio = 0.0;    // sup_M M^{-1} sum_{tau in [M, 2M)} ... / ||lambda||^4
  long best_M = 0;
  int m = 1;
  double lambda_norm4 = 0.0;
  bool condition_holds = true;
  std::vector<Vec2> violations;
  std::string convention = "tau ~ M means M <= tau < 2M, M = 1, 2, 4, ...";
};

/// Points lying on two lines, each meeting their block in >= 2^{j/2 + C} points.
inline std::vector<Vec2> one_rich_line_violations(const std::vector<std::vector<Vec2>>& blocks, int C) {
  std::vector<Vec2> out;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const auto bad = rich_intersections(blocks[j], richness_threshold(static_cast<int>(j), C));
    out.insert(out.end(), bad.begin(), bad.end());
  }
  return out;
}

inline Prop31Report verify_prop31(const LayeredFunction& g) {
  if (g.blocks.size() != g.lambda.size()) throw std::invalid_argument("verify_prop31: blocks/lambda size mismatch");
  Prop31Report r;
  r.violations = one_rich_line_violations(g.blocks, g.C);
  r.condition_holds = r.violations.empty();
  // Blocks are indexed j = 0..m with m >= 1.
  r.m = std::max<int>(1, static_cast<int>(g.blocks.size()) - 1);
  double l2 = 0.0;
  for (double l : g.lambda) l2 += l * l;
  r.lambda_norm4 = l2 * l2;
  if (r.lambda_norm4 == 0.0) return r;
  const auto ls = level_sums(g.values());
  const auto it0 = ls.sums.find(0);
  const double resonant = it0 == ls.sums.end() ? 0.0 : it0->second.real();
  r.resonant_ratio = resonant / (r.m * r.lambda_norm4);
  std::map<long, double> dyadic;
  for (const auto& [tau, s] : ls.sums) {
    if (tau <= 0) continue;
    long M = 1;
    while (2 * M <= tau) M *= 2;
    dyadic[M] += s.real();
  }
  for (const auto& [M, s] : dyadic) {
    const double v = s / static_cast<double>(M) / r.lambda_norm4;
    if (v > r.dyadic_ratio) {
      r.dyadic_ratio = v;
      r.best_M = M;
    }
  }
  return r;
}

}  // namespace modnls
