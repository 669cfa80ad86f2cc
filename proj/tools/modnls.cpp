// modnls: command-line driver for the experiments in include/modnls.
//
// Every subcommand resolves its parameters as flags > config file > defaults,
// writes its primary result to <out>/<subcommand>.<csv|json> and a separate
// manifest.json with the resolved configuration, version and timestamp.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "modnls/io.hpp"
#include "modnls/modnls.hpp"

namespace fs = std::filesystem;
using namespace modnls;
using io::json;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Param {
  std::string key;
  std::string fallback;
  std::string help;
  bool flag = false;
};

const std::vector<Param> common_params{
    {"seed", "20240601", "master seed"},
    {"workers", "1", "worker threads (results do not depend on it)"},
    {"out", "", "output directory (default: $MODNLS_OUTPUT_DIR or ./out)"},
    {"format", "csv", "primary output format: csv or json"},
};

const std::map<std::string, std::vector<Param>> schemas{
    {"fbm-sample",
     {{"hurst", "0.5", "Hurst index in (0,1)"},
      {"steps", "1024", "grid segments"},
      {"horizon", "1", "final time"},
      {"method", "auto", "auto, circulant or cholesky"}}},
    {"irregularity",
     {{"hurst", "0.5", "Hurst index of the sampled path"},
      {"steps", "1024", "path grid segments"},
      {"horizon", "1", "final time"},
      {"path-file", "", "read the path from a t,w CSV instead of sampling"},
      {"rho", "0.5", "decay exponent"},
      {"gamma", "0.4", "Holder exponent in (0,1]"},
      {"tau-min", "1", "smallest tau"},
      {"tau-max", "1024", "largest tau"},
      {"tau-points", "11", "geometric tau grid size"},
      {"time-points", "5", "uniform time points; all pairs s < t are used"}}},
    {"levelsets", {{"n", "1", "box half-side"}}},
    {"decompose",
     {{"n", "4", "box half-side for random data"},
      {"field-file", "", "kx,ky,re,im CSV; values are replaced by their moduli"},
      {"C", "0", "richness constant; 0 selects it automatically"},
      {"max-layers", "64", "layer cap"}}},
    {"vp-norm",
     {{"signal-file", "", "t,re,im CSV; random signal if empty"},
      {"samples", "64", "length of the random signal"},
      {"p", "2", "variation exponent > 1"}}},
    {"solve",
     {{"n-freq", "8", "box half-side"},
      {"s", "0.5", "Sobolev index"},
      {"dt", "1e-3", "time step"},
      {"T", "0.1", "horizon"},
      {"epsilon", "", "Strichartz parameter (default s/5)"},
      {"beta", "1", "smallness parameter"},
      {"tol", "1e-12", "absolute sup-H^s fixed-point tolerance"},
      {"max-iterations", "50", "Picard iteration cap"},
      {"linear-only", "false", "switch the nonlinearity off", true},
      {"short-interval", "false", "require T <= beta / N^{4 eps}", true},
      {"path", "fbm", "fbm or identity"},
      {"hurst", "0.5", "Hurst index of the path"},
      {"path-steps", "1024", "path grid segments on [0, T]"},
      {"path-file", "", "read the path from a t,w CSV"},
      {"data", "decay", "decay (c_k = A <k>^-d), random (Gaussian times A <k>^-d)"},
      {"amplitude", "1", "A"},
      {"decay", "4", "d"},
      {"field-file", "", "read u0 from a kx,ky,re,im CSV"}}},
    {"mass-check",
     {{"n-freq", "4", "box half-side"},
      {"dt", "1e-4", "coarse time step; the check reruns at dt/2"},
      {"T", "0.1", "horizon"},
      {"hurst", "0.5", "Hurst index"},
      {"path-steps", "2000", "path grid segments on [0, T]"},
      {"amplitude", "1", "A"},
      {"decay", "2", "d"},
      {"tol", "1e-12", "fixed-point tolerance"}}},
    {"strichartz",
     {{"n", "4", "half-side of S"},
      {"data-count", "20", "random fields"},
      {"path-count", "20", "fBm paths per field"},
      {"T0", "0.1", "interval length"},
      {"eps", "0.1", "Strichartz epsilon"},
      {"hurst", "0.5", "Hurst index"},
      {"path-steps", "256", "path grid segments"}}},
    {"stochastic-strichartz",
     {{"n", "4", "half-side of S"},
      {"trials", "200", "Monte Carlo trials"},
      {"T0", "0.1", "interval length"},
      {"hurst", "0.5", "Hurst index"},
      {"path-steps", "256", "path grid segments"}}},
    {"flow-convergence",
     {{"n", "8", "box half-side"},
      {"seeds", "100", "fBm paths"},
      {"deltas", "0.1,0.05,0.025,0.0125", "comma-separated delta values"},
      {"hurst", "0.5", "Hurst index"},
      {"horizon", "0.1", "path horizon"},
      {"path-steps", "1024", "path grid segments"},
      {"amplitude", "1", "A"},
      {"decay", "4", "d"}}},
    {"quadrilinear-check",
     {{"n", "2", "box half-side (<= 4)"},
      {"hurst", "0.5", "Hurst index"},
      {"steps", "256", "path grid segments"},
      {"s", "0", "left end of the time interval"},
      {"t", "1", "right end of the time interval"}}},
};

const std::map<std::string, std::string> descriptions{
    {"fbm-sample", "sample a fractional Brownian path"},
    {"irregularity", "grid maximum of the (rho, gamma) irregularity functional"},
    {"levelsets", "histogram of tau over parallelograms in a box"},
    {"decompose", "layered rich-line decomposition of a lattice function"},
    {"vp-norm", "exact V^p norm of a sampled signal"},
    {"solve", "Picard solve of the modulated cubic NLS"},
    {"mass-check", "mass drift at dt and dt/2"},
    {"strichartz", "pathwise Strichartz ratio sweep"},
    {"stochastic-strichartz", "Monte Carlo stochastic Strichartz ratio"},
    {"flow-convergence", "sup_{t<=delta} ||e^{iW_t Delta}u0 - u0|| ensemble means"},
    {"quadrilinear-check", "exact level-set sum against space-time quadrature"},
};

struct Value {
  std::string text;
  std::string origin;  // "default", "config line N", "flag"
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool known_key(const std::string& section, const std::string& key) {
  for (const auto& p : common_params)
    if (p.key == key) return true;
  if (section.empty()) return false;
  for (const auto& p : schemas.at(section))
    if (p.key == key) return true;
  return false;
}

// Flat key = value lines; [name] starts the section of a subcommand; '#' starts a comment.
// Keys before the first section are shared by every subcommand.
std::map<std::string, std::map<std::string, Value>> parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::map<std::string, std::map<std::string, Value>> out;
  std::string section, line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!schemas.count(section)) throw ConfigError(where + ": unknown section '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!known_key(section, key))
      throw ConfigError(where + ": unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"));
    if (out[section].count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    out[section][key] = {val, "config line " + std::to_string(no)};
  }
  return out;
}

class Resolved {
 public:
  Resolved(std::string name, std::map<std::string, Value> values) : name_(std::move(name)), v_(std::move(values)) {}

  const std::string& name() const { return name_; }

  std::string str(const std::string& key) const { return v_.at(key).text; }

  double real(const std::string& key) const {
    const auto& val = v_.at(key);
    std::size_t pos = 0;
    double x = 0.0;
    try {
      x = std::stod(val.text, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != val.text.size() || !std::isfinite(x)) fail(key, "expected a real number");
    return x;
  }

  long integer(const std::string& key, long lo = std::numeric_limits<long>::min()) const {
    const auto& val = v_.at(key);
    std::size_t pos = 0;
    long x = 0;
    try {
      x = std::stol(val.text, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != val.text.size()) fail(key, "expected an integer");
    if (x < lo) fail(key, "must be >= " + std::to_string(lo));
    return x;
  }

  std::uint64_t seed() const {
    const auto& val = v_.at("seed");
    std::size_t pos = 0;
    std::uint64_t x = 0;
    try {
      x = std::stoull(val.text, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != val.text.size() || val.text.front() == '-') fail("seed", "expected a nonnegative integer");
    return x;
  }

  bool boolean(const std::string& key) const {
    const auto& t = v_.at(key).text;
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    fail(key, "expected true or false");
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(str(key));
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      Resolved tmp(name_, {{"x", {trim(cell), v_.at(key).origin}}});
      out.push_back(tmp.real("x"));
    }
    if (out.empty()) fail(key, "expected a comma-separated list");
    return out;
  }

  std::string choice(const std::string& key, const std::vector<std::string>& options) const {
    const auto t = str(key);
    for (const auto& o : options)
      if (o == t) return t;
    std::string all;
    for (const auto& o : options) all += (all.empty() ? "" : ", ") + o;
    fail(key, "expected one of " + all);
  }

  json to_json() const {
    json j = json::object();
    for (const auto& [k, v] : v_) j[k] = v.text;
    return j;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    const auto& val = v_.at(key);
    throw ConfigError(name_ + ": " + key + " = '" + val.text + "' (" + val.origin + "): " + why);
  }

 private:
  std::string name_;
  std::map<std::string, Value> v_;
};

// ---------------------------------------------------------------------------
// Output

class Output {
 public:
  Output(const Resolved& cfg) : dir_(cfg.str("out")), json_(cfg.str("format") == "json") {
    fs::create_directories(dir_);
  }

  bool json_format() const { return json_; }

  std::ofstream open(const std::string& file) {
    files_.push_back(file);
    std::ofstream f(dir_ / file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + (dir_ / file).string() + "'");
    return f;
  }

  void write_json(const std::string& file, const json& j) { open(file) << j.dump(2) << '\n'; }

  void manifest(const Resolved& cfg) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    json m{{"subcommand", cfg.name()}, {"version", modnls::version}, {"timestamp", stamp},
           {"config", cfg.to_json()}, {"files", files_}};
    std::ofstream(dir_ / "manifest.json", std::ios::binary) << m.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  bool json_;
  std::vector<std::string> files_;
};

ModulationPath read_path_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open path file '" + file + "'");
  return io::read_path_csv(in);
}

FourierField read_field_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open field file '" + file + "'");
  return io::read_field_csv(in);
}

FbmMethod fbm_method(const Resolved& c) {
  const auto m = c.choice("method", {"auto", "circulant", "cholesky"});
  return m == "circulant" ? FbmMethod::circulant : m == "cholesky" ? FbmMethod::cholesky : FbmMethod::automatic;
}

// c_k = A <k>^{-d}, times a complex Gaussian when `random`.
FourierField decaying_field(long n, double amp, double decay, bool random, std::uint64_t seed) {
  const FrequencyBox box({0, 0}, n);
  FourierField u = random ? random_field(box, seed) : FourierField(box, std::vector<cplx>(box.size(), 1.0));
  for (std::size_t i = 0; i < u.size(); ++i) u.data()[i] *= amp * std::pow(japanese(u.point(i)), -decay);
  return u;
}

// ---------------------------------------------------------------------------
// Subcommands

void run_fbm_sample(const Resolved& c, Output& out) {
  const auto p = sample_fbm(c.real("hurst"), static_cast<std::size_t>(c.integer("steps", 1)), c.real("horizon"),
                            c.seed(), fbm_method(c));
  if (out.json_format()) {
    out.write_json("fbm-sample.json", json{{"hurst", p.hurst()}, {"t", p.times()}, {"w", p.values()}});
  } else {
    auto f = out.open("fbm-sample.csv");
    io::write_path_csv(f, p);
  }
}

void run_irregularity(const Resolved& c, Output& out) {
  const auto path = c.str("path-file").empty()
                        ? sample_fbm(c.real("hurst"), static_cast<std::size_t>(c.integer("steps", 1)),
                                     c.real("horizon"), c.seed())
                        : read_path_file(c.str("path-file"));
  IrregularityQuery q;
  q.rho = c.real("rho");
  q.gamma = c.real("gamma");
  const double lo = c.real("tau-min"), hi = c.real("tau-max");
  const long np = c.integer("tau-points", 1);
  if (!(lo > 0.0 && hi >= lo)) c.fail("tau-max", "need 0 < tau-min <= tau-max");
  for (long i = 0; i < np; ++i)
    q.tau_grid.push_back(np == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(np - 1)));
  const long tp = c.integer("time-points", 2);
  std::vector<double> ts;
  for (long i = 0; i < tp; ++i)
    ts.push_back(path.start() + (path.end() - path.start()) * static_cast<double>(i) / static_cast<double>(tp - 1));
  ts.back() = path.end();
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = i + 1; j < ts.size(); ++j) q.time_pairs.emplace_back(ts[i], ts[j]);
  const auto r = irregularity_functional(path, q, true);
  if (out.json_format()) {
    out.write_json("irregularity.json", json{{"rho", q.rho},
                                             {"gamma", q.gamma},
                                             {"value", r.value},
                                             {"argmax", {{"tau", r.argmax.tau}, {"s", r.argmax.s}, {"t", r.argmax.t}}}});
  } else {
    auto f = out.open("irregularity.csv");
    io::write_irregularity_csv(f, q, r);
  }
}

void run_levelsets(const Resolved& c, Output& out) {
  const auto h = level_set_histogram(FrequencyBox({0, 0}, c.integer("n", 0)));
  if (out.json_format()) {
    json j = json::array();
    for (const auto& [tau, n] : h) j.push_back({{"tau", tau}, {"count", n}});
    out.write_json("levelsets.json", j);
  } else {
    auto f = out.open("levelsets.csv");
    io::write_histogram_csv(f, h);
  }
}

void run_decompose(const Resolved& c, Output& out) {
  LatticeFunction f;
  if (c.str("field-file").empty()) {
    const auto u = random_field(FrequencyBox({0, 0}, c.integer("n", 0)), derive_seed(c.seed(), SeedDomain::data, 0));
    f = LatticeFunction(u.box());
    for (std::size_t i = 0; i < u.size(); ++i) f.data()[i] = std::abs(u.data()[i]);
  } else {
    const auto u = read_field_file(c.str("field-file"));
    f = LatticeFunction(u.box());
    for (std::size_t i = 0; i < u.size(); ++i) f.data()[i] = std::abs(u.data()[i]);
  }
  const long C = c.integer("C", 0);
  const int layers = static_cast<int>(c.integer("max-layers", 1));
  const auto d = C == 0 ? rich_line_decomposition_auto(f, layers) : rich_line_decomposition(f, static_cast<int>(C), layers);
  if (out.json_format()) {
    out.write_json("decompose.json", io::to_json(d));
  } else {
    auto s = out.open("decompose.csv");
    s << "layer,j,threshold,initial,exceptional,pruned,lambda\n";
    for (std::size_t n = 0; n < d.layers.size(); ++n)
      for (const auto& b : d.layers[n].blocks)
        s << n << ',' << b.j << ',' << b.threshold << ',' << b.initial.size() << ',' << b.exceptional.size() << ','
          << b.pruned.size() << ',' << io::num(b.lambda) << '\n';
  }
}

void run_vp_norm(const Resolved& c, Output& out) {
  SampledSignal sig;
  if (c.str("signal-file").empty()) {
    const auto n = static_cast<std::size_t>(c.integer("samples", 1));
    std::mt19937_64 rng(derive_seed(c.seed(), SeedDomain::data, 0));
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> t(n);
    std::vector<cplx> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(n - 1, 1));
      const double a = g(rng);
      const double b = g(rng);
      v[i] = cplx(a, b);
    }
    sig = SampledSignal(t, v);
  } else {
    std::ifstream in(c.str("signal-file"));
    if (!in) throw std::runtime_error("cannot open signal file '" + c.str("signal-file") + "'");
    sig = io::read_signal_csv(in);
  }
  const double p = c.real("p");
  const double v = vp_norm(sig, p);
  if (out.json_format()) {
    out.write_json("vp-norm.json", json{{"p", p}, {"samples", sig.times.size()}, {"value", v}});
  } else {
    out.open("vp-norm.csv") << "p,samples,value\n" << io::num(p) << ',' << sig.times.size() << ',' << io::num(v) << '\n';
  }
}

SolverConfig solver_config(const Resolved& c) {
  SolverConfig cfg;
  cfg.N_freq = c.integer("n-freq", 0);
  cfg.s = c.real("s");
  cfg.dt = c.real("dt");
  cfg.T = c.real("T");
  if (!c.str("epsilon").empty()) cfg.epsilon = c.real("epsilon");
  cfg.beta = c.real("beta");
  cfg.fixed_point_tol = c.real("tol");
  cfg.max_iterations = static_cast<int>(c.integer("max-iterations", 1));
  cfg.nonlinearity_on = !c.boolean("linear-only");
  cfg.short_interval = c.boolean("short-interval");
  cfg.workers = static_cast<unsigned>(c.integer("workers", 1));
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("solve: ") + e.what());
  }
  return cfg;
}

void run_solve(const Resolved& c, Output& out) {
  const auto cfg = solver_config(c);
  ModulationPath path = ModulationPath::identity(std::max(cfg.T, 1e-300));
  if (!c.str("path-file").empty()) {
    path = read_path_file(c.str("path-file"));
  } else if (c.choice("path", {"fbm", "identity"}) == "fbm" && cfg.T > 0.0) {
    path = sample_fbm(c.real("hurst"), static_cast<std::size_t>(c.integer("path-steps", 1)), cfg.T,
                      derive_seed(c.seed(), SeedDomain::path, 0));
  }
  const auto u0 = c.str("field-file").empty()
                      ? decaying_field(cfg.N_freq, c.real("amplitude"), c.real("decay"),
                                       c.choice("data", {"decay", "random"}) == "random",
                                       derive_seed(c.seed(), SeedDomain::data, 0))
                      : read_field_file(c.str("field-file"));
  const auto sol = picard_solve(u0, path, cfg);
  auto diag = io::diagnostics_json(sol);
  if (!sol.converged) {
    std::cerr << "modnls solve: Picard iteration did not converge\n" << diag.dump(2) << '\n';
    throw std::runtime_error("solve: no convergence within max-iterations");
  }
  if (out.json_format()) {
    json fields = json::array();
    for (std::size_t i = 0; i < sol.fields.back().size(); ++i) {
      const cplx z = sol.fields.back().data()[i];
      fields.push_back({io::to_json(sol.fields.back().point(i)), z.real(), z.imag()});
    }
    diag["final_field"] = fields;
    out.write_json("solve.json", diag);
  } else {
    auto s = out.open("solution.csv");
    io::write_solution_csv(s, sol);
    auto m = out.open("mass.csv");
    io::write_mass_csv(m, sol);
    out.write_json("diagnostics.json", diag);
  }
}

void run_mass_check(const Resolved& c, Output& out) {
  SolverConfig cfg;
  cfg.N_freq = c.integer("n-freq", 0);
  cfg.T = c.real("T");
  cfg.dt = c.real("dt");
  cfg.fixed_point_tol = c.real("tol");
  cfg.workers = static_cast<unsigned>(c.integer("workers", 1));
  const auto path = sample_fbm(c.real("hurst"), static_cast<std::size_t>(c.integer("path-steps", 1)), cfg.T,
                               derive_seed(c.seed(), SeedDomain::path, 0));
  const auto u0 = decaying_field(cfg.N_freq, c.real("amplitude"), c.real("decay"), true,
                                 derive_seed(c.seed(), SeedDomain::data, 0));
  std::vector<std::pair<double, double>> rows;
  for (double dt : {cfg.dt, 0.5 * cfg.dt}) {
    cfg.dt = dt;
    const auto sol = picard_solve(u0, path, cfg);
    if (!sol.converged) throw std::runtime_error("mass-check: no convergence at dt = " + io::num(dt));
    rows.emplace_back(dt, mass_drift(sol));
  }
  const double shrink = rows[1].second > 0.0 ? rows[0].second / rows[1].second : 0.0;
  if (out.json_format()) {
    out.write_json("mass-check.json", json{{"dt", {rows[0].first, rows[1].first}},
                                           {"drift", {rows[0].second, rows[1].second}},
                                           {"shrink", shrink}});
  } else {
    auto f = out.open("mass-check.csv");
    f << "dt,drift\n";
    for (const auto& [dt, d] : rows) f << io::num(dt) << ',' << io::num(d) << '\n';
  }
}

void run_strichartz(const Resolved& c, Output& out) {
  const auto sw = pathwise_sweep(c.integer("n", 0), static_cast<std::size_t>(c.integer("data-count", 1)),
                                 static_cast<std::size_t>(c.integer("path-count", 1)), c.real("T0"), c.real("eps"),
                                 c.real("hurst"), c.seed(), static_cast<std::size_t>(c.integer("path-steps", 1)),
                                 static_cast<unsigned>(c.integer("workers", 1)));
  if (out.json_format()) {
    auto j = io::to_json(sw.report);
    j["N"] = sw.N;
    j["T0"] = sw.T0;
    j["eps"] = sw.eps;
    j["H"] = sw.H;
    out.write_json("strichartz.json", j);
  } else {
    auto f = out.open("strichartz.csv");
    io::write_bench_csv(f, sw.report);
  }
}

void run_stochastic(const Resolved& c, Output& out) {
  const long n = c.integer("n", 0);
  const FrequencyBox S({0, 0}, n);
  const double T0 = c.real("T0");
  const auto rep = stochastic_ratio([&](std::uint64_t seed) { return random_field(S, seed); }, c.real("hurst"),
                                    static_cast<std::size_t>(c.integer("trials", 2)), S, 0.0, T0, c.seed(),
                                    static_cast<std::size_t>(c.integer("path-steps", 1)),
                                    static_cast<unsigned>(c.integer("workers", 1)));
  if (out.json_format()) {
    out.write_json("stochastic-strichartz.json", io::to_json(rep));
  } else {
    auto f = out.open("stochastic-strichartz.csv");
    io::write_bench_csv(f, rep);
  }
}

void run_flow_convergence(const Resolved& c, Output& out) {
  const auto u0 = decaying_field(c.integer("n", 0), c.real("amplitude"), c.real("decay"), false, 0);
  const auto deltas = c.reals("deltas");
  const auto seeds = static_cast<std::size_t>(c.integer("seeds", 1));
  std::vector<std::vector<FlowConvergenceRow>> per(seeds);
  parallel_for(seeds, static_cast<unsigned>(c.integer("workers", 1)), [&](std::size_t i) {
    const auto path = sample_fbm(c.real("hurst"), static_cast<std::size_t>(c.integer("path-steps", 1)),
                                 c.real("horizon"), derive_seed(c.seed(), SeedDomain::path, i));
    per[i] = linear_flow_convergence(u0, path, deltas);
  });
  std::vector<double> mean(deltas.size()), mx(deltas.size());
  for (const auto& rows : per)
    for (std::size_t d = 0; d < deltas.size(); ++d) {
      mean[d] += rows[d].value / static_cast<double>(seeds);
      mx[d] = std::max(mx[d], rows[d].value);
    }
  if (out.json_format()) {
    out.write_json("flow-convergence.json", json{{"delta", deltas}, {"mean", mean}, {"max", mx}, {"l2_u0", l2_norm(u0)}});
  } else {
    auto f = out.open("flow-convergence.csv");
    f << "delta,mean,max\n";
    for (std::size_t d = 0; d < deltas.size(); ++d)
      f << io::num(deltas[d]) << ',' << io::num(mean[d]) << ',' << io::num(mx[d]) << '\n';
  }
}

void run_quadrilinear(const Resolved& c, Output& out) {
  const double s = c.real("s"), t = c.real("t");
  const auto path = sample_fbm(c.real("hurst"), static_cast<std::size_t>(c.integer("steps", 1)), t,
                               derive_seed(c.seed(), SeedDomain::path, 0));
  const long n = c.integer("n", 0);
  const auto f = random_field(FrequencyBox({0, 0}, n), derive_seed(c.seed(), SeedDomain::data, 0));
  const auto r = quadrilinear_identity_check(f, path, s, t);
  if (out.json_format()) {
    out.write_json("quadrilinear-check.json",
                   json{{"n", n}, {"exact", r.exact}, {"grid", r.grid}, {"relative_error", r.relative_error}});
  } else {
    out.open("quadrilinear-check.csv") << "n,exact,grid,relative_error\n"
                                       << n << ',' << io::num(r.exact) << ',' << io::num(r.grid) << ','
                                       << io::num(r.relative_error) << '\n';
  }
}

const std::map<std::string, void (*)(const Resolved&, Output&)> runners{
    {"fbm-sample", run_fbm_sample},
    {"irregularity", run_irregularity},
    {"levelsets", run_levelsets},
    {"decompose", run_decompose},
    {"vp-norm", run_vp_norm},
    {"solve", run_solve},
    {"mass-check", run_mass_check},
    {"strichartz", run_strichartz},
    {"stochastic-strichartz", run_stochastic},
    {"flow-convergence", run_flow_convergence},
    {"quadrilinear-check", run_quadrilinear},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"modnls: numerical experiments for the modulated cubic NLS on the 2-torus"};
  app.require_subcommand(1);
  app.set_version_flag("--version", modnls::version);

  struct Sub {
    CLI::App* app = nullptr;
    std::string config;
    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> options;
  };
  std::map<std::string, Sub> subs;
  for (const auto& [name, params] : schemas) {
    auto& sub = subs[name];
    sub.app = app.add_subcommand(name, descriptions.at(name));
    sub.app->add_option("--config", sub.config, "config file (flat key = value, [subcommand] sections)");
    std::vector<Param> all = common_params;
    all.insert(all.end(), params.begin(), params.end());
    for (const auto& p : all) {
      const std::string help = p.help + (p.fallback.empty() ? "" : " [" + p.fallback + "]");
      if (p.flag)
        sub.options[p.key] = sub.app->add_flag("--" + p.key, help);
      else
        sub.options[p.key] = sub.app->add_option("--" + p.key, sub.flags[p.key], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  std::string name;
  for (const auto& [n, sub] : subs)
    if (sub.app->parsed()) name = n;
  auto& sub = subs.at(name);

  std::map<std::string, Value> values;
  try {
    std::vector<Param> all = common_params;
    all.insert(all.end(), schemas.at(name).begin(), schemas.at(name).end());
    for (const auto& p : all) values[p.key] = {p.fallback, "default"};
    if (const char* env = std::getenv("MODNLS_OUTPUT_DIR"); env && *env) values["out"] = {env, "MODNLS_OUTPUT_DIR"};
    if (values["out"].text.empty()) values["out"] = {"out", "default"};
    if (!sub.config.empty()) {
      const auto file = parse_config(sub.config);
      for (const auto& section : {std::string(), name}) {
        const auto it = file.find(section);
        if (it == file.end()) continue;
        for (const auto& [k, v] : it->second) values[k] = {v.text, sub.config + " " + v.origin};
      }
    }
    for (const auto& p : all) {
      if (sub.options[p.key]->count() == 0) continue;
      values[p.key] = {p.flag ? "true" : sub.flags[p.key], "flag --" + p.key};
    }
    const Resolved cfg(name, values);
    cfg.choice("format", {"csv", "json"});
    cfg.seed();
    cfg.integer("workers", 1);
    Output out(cfg);
    runners.at(name)(cfg, out);
    out.manifest(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "modnls: config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "modnls " << name << ": " << e.what() << '\n' << "resolved config:\n";
    for (const auto& [k, v] : values) std::cerr << "  " << k << " = " << v.text << "  (" << v.origin << ")\n";
    return 3;
  }
  return 0;
}
