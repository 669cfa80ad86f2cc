#pragma once

// CSV and JSON serialization. Every CSV starts with a header row; numbers are
// written with %.17g so that files round-trip exactly.

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "modnls/bench.hpp"
#include "modnls/lattice.hpp"
#include "modnls/modulation.hpp"
#include "modnls/solver.hpp"
#include "modnls/spectral.hpp"
#include "modnls/variation.hpp"

namespace modnls::io {

using json = nlohmann::ordered_json;

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, std::size_t line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size())
    throw std::runtime_error("csv line " + std::to_string(line) + ": not a number: '" + s + "'");
  return v;
}

// Reads rows after checking the header; each row must have header.size() numeric cells.
inline std::vector<std::vector<double>> read_table(std::istream& in, const std::vector<std::string>& header) {
  std::string line;
  std::size_t no = 0;
  std::vector<std::vector<double>> rows;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (!seen_header) {
      if (cells != header) {
        std::string want;
        for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
        throw std::runtime_error("csv line " + std::to_string(no) + ": expected header '" + want + "'");
      }
      seen_header = true;
      continue;
    }
    if (cells.size() != header.size())
      throw std::runtime_error("csv line " + std::to_string(no) + ": expected " + std::to_string(header.size()) +
                               " columns, found " + std::to_string(cells.size()));
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c, no));
    rows.push_back(std::move(row));
  }
  if (!seen_header) throw std::runtime_error("csv: missing header row");
  return rows;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV writers and readers

inline void write_histogram_csv(std::ostream& os, const std::map<long, std::int64_t>& h) {
  os << "tau,count\n";
  for (const auto& [tau, c] : h) os << tau << ',' << c << '\n';
}

inline void write_path_csv(std::ostream& os, const ModulationPath& p) {
  os << "t,w\n";
  for (std::size_t i = 0; i < p.times().size(); ++i) os << num(p.times()[i]) << ',' << num(p.values()[i]) << '\n';
}

inline ModulationPath read_path_csv(std::istream& in) {
  const auto rows = detail::read_table(in, {"t", "w"});
  std::vector<double> t, w;
  for (const auto& r : rows) {
    t.push_back(r[0]);
    w.push_back(r[1]);
  }
  return ModulationPath(t, w, PathKind::custom);
}

inline void write_irregularity_csv(std::ostream& os, const IrregularityQuery& q, const IrregularityResult& r) {
  os << "rho,gamma,tau,s,t,value\n";
  for (const auto& x : r.samples)
    os << num(q.rho) << ',' << num(q.gamma) << ',' << num(x.tau) << ',' << num(x.s) << ',' << num(x.t) << ','
       << num(x.value) << '\n';
}

inline void write_field_csv(std::ostream& os, const FourierField& u) {
  os << "kx,ky,re,im\n";
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Vec2 k = u.point(i);
    os << k.x << ',' << k.y << ',' << num(u.data()[i].real()) << ',' << num(u.data()[i].imag()) << '\n';
  }
}

/// Reads coefficients into the smallest origin-centred box containing every listed frequency.
inline FourierField read_field_csv(std::istream& in) {
  const auto rows = detail::read_table(in, {"kx", "ky", "re", "im"});
  long reach = 0;
  for (const auto& r : rows) {
    if (r[0] != std::floor(r[0]) || r[1] != std::floor(r[1]))
      throw std::runtime_error("field csv: frequencies must be integers");
    reach = std::max({reach, static_cast<long>(std::abs(r[0])), static_cast<long>(std::abs(r[1]))});
  }
  FourierField u(FrequencyBox({0, 0}, reach));
  for (const auto& r : rows) u[{static_cast<long>(r[0]), static_cast<long>(r[1])}] = cplx(r[2], r[3]);
  return u;
}

inline void write_spacetime_csv(std::ostream& os, const SpaceTimeGrid& g, const std::vector<std::vector<cplx>>& v) {
  os << "t,x,y,re,im\n";
  const auto m = static_cast<std::size_t>(g.points);
  for (std::size_t n = 0; n < g.times.size(); ++n)
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) {
        const cplx z = v[n][a * m + b];
        os << num(g.times[n]) << ',' << num(two_pi * static_cast<double>(a) / static_cast<double>(m)) << ','
           << num(two_pi * static_cast<double>(b) / static_cast<double>(m)) << ',' << num(z.real()) << ','
           << num(z.imag()) << '\n';
      }
}

inline void write_signal_csv(std::ostream& os, const SampledSignal& s) {
  os << "t,re,im\n";
  for (std::size_t i = 0; i < s.times.size(); ++i)
    os << num(s.times[i]) << ',' << num(s.values[i].real()) << ',' << num(s.values[i].imag()) << '\n';
}

inline SampledSignal read_signal_csv(std::istream& in) {
  const auto rows = detail::read_table(in, {"t", "re", "im"});
  std::vector<double> t;
  std::vector<cplx> v;
  for (const auto& r : rows) {
    t.push_back(r[0]);
    v.emplace_back(r[1], r[2]);
  }
  return {t, v};
}

inline void write_solution_csv(std::ostream& os, const Solution& sol) {
  os << "t,kx,ky,re,im\n";
  for (std::size_t n = 0; n < sol.times.size(); ++n)
    for (std::size_t i = 0; i < sol.fields[n].size(); ++i) {
      const Vec2 k = sol.fields[n].point(i);
      const cplx z = sol.fields[n].data()[i];
      os << num(sol.times[n]) << ',' << k.x << ',' << k.y << ',' << num(z.real()) << ',' << num(z.imag()) << '\n';
    }
}

inline void write_mass_csv(std::ostream& os, const Solution& sol) {
  os << "t,mass,drift\n";
  const auto m = sol.mass_trajectory();
  for (std::size_t n = 0; n < sol.times.size(); ++n)
    os << num(sol.times[n]) << ',' << num(m[n]) << ','
       << num(sol.mass0 == 0.0 ? 0.0 : std::abs(sol.mass_change[n]) / sol.mass0) << '\n';
}

inline void write_bench_csv(std::ostream& os, const BenchReport& r) {
  os << "seed,N,T0,eps,H,ratio\n";
  for (const auto& row : r.rows)
    os << row.seed << ',' << row.N << ',' << num(row.T0) << ',' << num(row.eps) << ',' << num(row.H) << ','
       << num(row.ratio) << '\n';
}

// ---------------------------------------------------------------------------
// JSON

inline json to_json(Vec2 k) { return json::array({k.x, k.y}); }

inline json to_json(const std::vector<Vec2>& pts) {
  json a = json::array();
  for (const Vec2 k : pts) a.push_back(to_json(k));
  return a;
}

inline json to_json(const Decomposition& d) {
  json j;
  j["C"] = d.C;
  j["tried"] = d.tried;
  j["terminated"] = d.terminated;
  j["halving"] = d.halving;
  j["layers"] = json::array();
  for (const auto& layer : d.layers) {
    json l;
    l["norm"] = layer.norm;
    l["next_norm"] = layer.next_norm;
    l["ratio"] = layer.ratio;
    l["blocks"] = json::array();
    for (const auto& b : layer.blocks) {
      json jb;
      jb["j"] = b.j;
      jb["threshold"] = b.threshold;
      jb["head"] = b.head;
      jb["lambda"] = b.lambda;
      jb["initial"] = b.initial.size();
      jb["exceptional"] = to_json(b.exceptional);
      jb["pruned"] = b.pruned.size();
      l["blocks"].push_back(jb);
    }
    j["layers"].push_back(l);
  }
  return j;
}

inline json to_json(const Prop31Report& r) {
  return json{{"resonant_ratio", r.resonant_ratio}, {"dyadic_ratio", r.dyadic_ratio}, {"best_M", r.best_M},
              {"m", r.m},
              {"lambda_norm4", r.lambda_norm4},
              {"condition_holds", r.condition_holds},
              {"violations", to_json(r.violations)},
              {"convention", r.convention}};
}

inline json to_json(const YsReport& r) {
  json j{{"value", r.value}, {"s", r.s}, {"p", r.p}};
  j["contributions"] = json::array();
  for (const auto& c : r.contributions)
    j["contributions"].push_back(json{{"k", to_json(c.k)}, {"weight", c.weight}, {"vp", c.vp}});
  return j;
}

inline json to_json(const BenchReport& r) {
  return json{{"trials", r.rows.size()}, {"max", r.max},     {"mean", r.mean},
              {"q05", r.q05},            {"q50", r.q50},     {"q95", r.q95},
              {"estimate", r.estimate},  {"standard_error", r.standard_error}};
}

inline json to_json(const IntegralBoundReport& r) {
  json j{{"hurst", r.hurst}, {"T0", r.T0}, {"constant", r.constant}};
  j["rows"] = json::array();
  for (const auto& row : r.rows)
    j["rows"].push_back(json{{"tau", row.tau}, {"integral", row.integral}, {"bound", row.bound}, {"ratio", row.ratio}});
  return j;
}

inline json to_json(const SquareReport& r) {
  json j{{"side", r.side}, {"total_y0", r.total_y0}, {"max_ratio", r.max_ratio}};
  j["squares"] = json::array();
  for (const auto& s : r.squares)
    j["squares"].push_back(json{{"index", to_json(s.index)}, {"l4", s.l4}, {"y0", s.y0}, {"ratio", s.ratio},
                                {"local_ratio", s.local_ratio}});
  return j;
}

inline json diagnostics_json(const Solution& sol) {
  json j{{"converged", sol.converged}, {"iterations", sol.iterations}, {"distances", sol.distances},
         {"contraction_factors", sol.factors}, {"residual", sol.residual}, {"mass0", sol.mass0},
         {"mass_drift", mass_drift(sol)}, {"mass_trajectory", sol.mass_trajectory()}};
  return j;
}

}  // namespace modnls::io
