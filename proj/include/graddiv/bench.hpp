#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "graddiv/mms.hpp"
#include "graddiv/stability_monitor.hpp"
#include "graddiv/time_schemes.hpp"

namespace graddiv {

inline Scheme parse_scheme(const std::string& s) {
  if (s == "theta" || s == "cn" || s == "crank_nicolson") return Scheme::Theta;
  if (s == "jacobi" || s == "block_jacobi") return Scheme::BlockJacobi;
  if (s == "gauss_seidel" || s == "gs" || s == "block_gauss_seidel")
    return Scheme::BlockGaussSeidel;
  if (s == "alt_triangular" || s == "at" || s == "alternating_triangular")
    return Scheme::AltTriangular;
  if (s == "three_level" || s == "3level" || s == "three_level_at") return Scheme::ThreeLevelAT;
  throw std::invalid_argument("unknown scheme '" + s + "'");
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw std::invalid_argument("invalid value for " + key + ": '" + s + "'");
  return v;
}

inline int parse_int(const std::string& key, const std::string& s) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw std::invalid_argument("invalid value for " + key + ": '" + s + "'");
  return static_cast<int>(v);
}

inline bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw std::invalid_argument("invalid value for " + key + ": '" + s + "'");
}

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Formats with 6 significant digits (human-facing output).
inline std::string format_sig(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

/// Flat key=value configuration of a benchmark run; command-line flags use
/// the same keys and override values read from a file.
struct BenchConfig {
  Scheme scheme = Scheme::Theta;
  double sigma = 0.5;
  double tau = 0.1;
  double horizon = 10.0;  // key "T"
  int nx = 200;
  double k = 1.0;
  bool monitor = false;
  std::string out;
  int sweep_halvings = 4;
  double solver_tol = 1e-10;

  bool operator==(const BenchConfig&) const = default;

  void set(const std::string& key, const std::string& value) {
    if (key == "scheme") scheme = parse_scheme(value);
    else if (key == "sigma") sigma = detail::parse_double(key, value);
    else if (key == "tau") tau = detail::parse_double(key, value);
    else if (key == "T") horizon = detail::parse_double(key, value);
    else if (key == "nx") nx = detail::parse_int(key, value);
    else if (key == "k") k = detail::parse_double(key, value);
    else if (key == "monitor") monitor = detail::parse_bool(key, value);
    else if (key == "out") out = value;
    else if (key == "sweep-halvings" || key == "sweep_halvings")
      sweep_halvings = detail::parse_int(key, value);
    else if (key == "solver_tol") solver_tol = detail::parse_double(key, value);
    else throw std::invalid_argument("unknown configuration key '" + key + "'");
  }

  static BenchConfig from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config file '" + path + "'");
    BenchConfig cfg;
    cfg.apply_file(is);
    return cfg;
  }

  void apply_file(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      if (line[first] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("config line is not key=value: '" + line + "'");
      std::string key = line.substr(first, eq - first);
      std::string value = line.substr(eq + 1);
      while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
      const auto vfirst = value.find_first_not_of(" \t");
      value = (vfirst == std::string::npos) ? std::string() : value.substr(vfirst);
      while (!value.empty() && (value.back() == ' ' || value.back() == '\t' || value.back() == '\r'))
        value.pop_back();
      set(key, value);
    }
  }

  SchemeConfig scheme_config() const {
    SchemeConfig sc;
    sc.scheme = scheme;
    sc.sigma = sigma;
    sc.tau = tau;
    sc.horizon = horizon;
    sc.monitor = monitor;
    sc.solver_tol = solver_tol;
    return sc;
  }

  void validate() const {
    if (nx < 2) throw std::invalid_argument("bench config: need nx >= 2");
    if (!(k >= 0.0)) throw std::invalid_argument("bench config: need k >= 0");
    if (sweep_halvings < 1) throw std::invalid_argument("bench config: need sweep-halvings >= 1");
    (void)scheme_config().num_steps();
  }
};

struct SweepRow {
  double tau = 0.0;
  double error = 0.0;
  double order = 0.0;  // log2(e_prev / e); valid only when has_order
  bool has_order = false;
  double wall_seconds = 0.0;
  std::string ledger;

  bool operator==(const SweepRow&) const = default;
};

struct RunReport {
  BenchConfig config;
  std::vector<SweepRow> rows;

  bool operator==(const RunReport&) const = default;
};

namespace detail {

inline std::string ledger_path(const std::string& out, int level) {
  if (out.empty()) return {};
  std::string base = out;
  if (base.size() > 4 && base.compare(base.size() - 4, 4, ".csv") == 0)
    base.resize(base.size() - 4);
  return base + ".ledger" + (level >= 0 ? std::to_string(level) : std::string()) + ".csv";
}

}  // namespace detail

/// One manufactured-case run: full time loop, final-time error, wall time,
/// and (optionally) the monitor ledger written next to `out`.
inline RunReport run_single(const BenchConfig& cfg, int sweep_level = -1) {
  cfg.validate();
  const MacGrid grid = make_grid(cfg.nx, cfg.nx, 1.0, 1.0);
  const ManufacturedCase mc(cfg.k);
  const GradDivOperator op = mc.make_operator(grid);
  const SchemeConfig sc = cfg.scheme_config();
  const StaggeredField v0 = mc.initial_condition(grid);

  StabilityMonitor monitor(op, sc.scheme, sc.sigma, sc.tau);
  StepObserver* observer = cfg.monitor ? &monitor : nullptr;

  const auto t0 = std::chrono::steady_clock::now();
  const StaggeredField v = run_time_loop(op, sc, mc.source_sampler(grid), v0, observer);
  const auto t1 = std::chrono::steady_clock::now();

  SweepRow row;
  row.tau = cfg.tau;
  row.error = mc.measure_error(v, cfg.horizon);
  row.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  if (cfg.monitor && !cfg.out.empty()) {
    row.ledger = detail::ledger_path(cfg.out, sweep_level);
    monitor.write_csv(row.ledger);
  }
  RunReport report;
  report.config = cfg;
  report.rows.push_back(std::move(row));
  return report;
}

/// tau-refinement sweep: tau, tau/2, ..., tau/2^n with observed orders
/// log2(e_k / e_{k+1}) attached to the finer row.
inline RunReport run_sweep(const BenchConfig& cfg, int n_halvings) {
  if (n_halvings < 1) throw std::invalid_argument("run_sweep: need n_halvings >= 1");
  cfg.validate();
  RunReport report;
  report.config = cfg;
  BenchConfig level = cfg;
  for (int s = 0; s <= n_halvings; ++s) {
    RunReport one = run_single(level, s);
    SweepRow row = one.rows.front();
    if (s > 0) {
      row.order = std::log2(report.rows.back().error / row.error);
      row.has_order = true;
    }
    report.rows.push_back(std::move(row));
    level.tau *= 0.5;
  }
  return report;
}

/// Report CSV: `# key=value` preamble echoing the configuration, then one
/// data row per run level. Numbers carry 17 significant digits so parsing
/// reproduces the report exactly.
inline void write_report_csv(const RunReport& r, std::ostream& os) {
  const BenchConfig& c = r.config;
  os << "# graddiv-bench report\n";
  os << "# scheme=" << scheme_name(c.scheme) << "\n";
  os << "# sigma=" << detail::fmt17(c.sigma) << "\n";
  os << "# tau=" << detail::fmt17(c.tau) << "\n";
  os << "# T=" << detail::fmt17(c.horizon) << "\n";
  os << "# nx=" << c.nx << "\n";
  os << "# k=" << detail::fmt17(c.k) << "\n";
  os << "# monitor=" << (c.monitor ? 1 : 0) << "\n";
  os << "# out=" << c.out << "\n";
  os << "# sweep-halvings=" << c.sweep_halvings << "\n";
  os << "# solver_tol=" << detail::fmt17(c.solver_tol) << "\n";
  os << "tau,error,order,wall_seconds,ledger\n";
  for (const SweepRow& row : r.rows) {
    os << detail::fmt17(row.tau) << ',' << detail::fmt17(row.error) << ','
       << (row.has_order ? detail::fmt17(row.order) : std::string()) << ','
       << detail::fmt17(row.wall_seconds) << ',' << row.ledger << "\n";
  }
}

inline void write_report_csv(const RunReport& r, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_report_csv: cannot open " + path);
  write_report_csv(r, os);
}

inline RunReport read_report_csv(std::istream& is) {
  RunReport r;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;  // title line
      std::string key = line.substr(2, eq - 2);
      std::string value = line.substr(eq + 1);
      r.config.set(key, value);
      continue;
    }
    if (!header_seen) {
      if (line != "tau,error,order,wall_seconds,ledger")
        throw std::invalid_argument("read_report_csv: unexpected header: " + line);
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      cells.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (cells.size() != 5)
      throw std::invalid_argument("read_report_csv: bad row: " + line);
    SweepRow row;
    row.tau = detail::parse_double("tau", cells[0]);
    row.error = detail::parse_double("error", cells[1]);
    if (!cells[2].empty()) {
      row.order = detail::parse_double("order", cells[2]);
      row.has_order = true;
    }
    row.wall_seconds = detail::parse_double("wall_seconds", cells[3]);
    row.ledger = cells[4];
    r.rows.push_back(std::move(row));
  }
  if (!header_seen) throw std::invalid_argument("read_report_csv: missing header");
  return r;
}

inline RunReport read_report_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_report_csv: cannot open " + path);
  return read_report_csv(is);
}

/// Markdown summary of a sweep (6 significant digits).
inline std::string report_markdown(const RunReport& r) {
  std::ostringstream os;
  os << "| tau | error | order |\n|---|---|---|\n";
  for (const SweepRow& row : r.rows) {
    os << "| " << format_sig(row.tau) << " | " << format_sig(row.error) << " | "
       << (row.has_order ? format_sig(row.order) : std::string("-")) << " |\n";
  }
  return os.str();
}

}  // namespace graddiv
