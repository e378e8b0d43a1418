#pragma once

// Run configuration: a plain `key = value` text form, `#` comments, and the
// equivalent command-line flags. Flags override values read from a file.

#include <CLI11.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "plap/errors.hpp"
#include "plap/shooter.hpp"

namespace plap {

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s = {"check-f", "shoot", "eigen", "scan", "solve", "verify", "plot"};
  return s;
}

struct RunConfig {
  std::string subcommand = "shoot";
  // problem
  double p = 2.0;
  int N = 3;
  std::string kind = "ball";  // ball | annulus
  double R1 = 0.0;
  double R2 = 1.0;
  double q = 4.0;
  double r = 2.0;
  double eta = 0.5;
  std::string f_table;  // two-column (s, f(s)) file; replaces the prototype when set
  // per subcommand
  double d = 2.0;
  double tol = 1e-10;
  int kmax = 5;
  int k = 1;
  int grid = 512;
  double epsilon = 0.1;
  double s_max = 1e6;
  std::string suite = "all";  // ptrig | appendix | all
  std::string out = ".";
  bool svg = false;
  bool profiles = false;

  RadialDomain domain() const {
    return kind == "ball" ? RadialDomain::ball(R2, N) : RadialDomain::annulus(R1, R2, N);
  }
  NonlinearitySpec nonlinearity() const {
    NonlinearitySpec s = f_table.empty() ? NonlinearitySpec::prototype(p, N, q, r, eta)
                                         : NonlinearitySpec::table(p, N, SampledTable::load(f_table));
    s.eta = eta;
    return s;
  }
  Problem problem() const { return Problem(domain(), nonlinearity()); }

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x))
    throw ConfigError("key '" + key + "': expected a finite number, got '" + v + "'");
  return x;
}

inline int to_int(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE || x < -1000000000L || x > 1000000000L)
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<int>(x);
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

struct Key {
  const char* name;
  const char* help;
  const char* type = "VALUE";
};

// Order fixes the textual form.
inline const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      {"subcommand", "check-f | shoot | eigen | scan | solve | verify | plot"},
      {"p", "p-Laplacian exponent, p > 1 (default 2)", "FLOAT"},
      {"N", "space dimension (default 3)", "INT"},
      {"kind", "ball | annulus (default: ball if R1 = 0, else annulus)", "KIND"},
      {"R1", "inner radius, 0 for a ball (default 0)", "FLOAT"},
      {"R2", "outer radius (default 1)", "FLOAT"},
      {"q", "prototype exponent q (default 4)", "FLOAT"},
      {"r", "prototype exponent r, p <= r < q (default 2)", "FLOAT"},
      {"eta", "eta in (0, 1) for the growth hypotheses and r0 (default 0.5)", "FLOAT"},
      {"f_table", "two-column (s, f(s)) table replacing the prototype (default none)", "PATH"},
      {"d", "initial datum for shoot and plot (default 2)", "FLOAT"},
      {"tol", "integrator relative tolerance (default 1e-10)", "FLOAT"},
      {"kmax", "number of eigenvalues for eigen (default 5)", "INT"},
      {"k", "target half-turns j = 1..k for scan and solve (default 1)", "INT"},
      {"grid", "scan points per side of 1 (default 512)", "INT"},
      {"epsilon", "epsilon for verify appendix (default 0.1)", "FLOAT"},
      {"s_max", "probe grid end for check-f (default 1e6)", "FLOAT"},
      {"suite", "ptrig | appendix | all, for verify (default all)", "SUITE"},
      {"out", "output directory (default .)", "DIR"},
      {"svg", "also write an SVG phase portrait for shoot (default false)"},
      {"profiles", "also write eigenfunction profiles for eigen (default false)"},
  };
  return k;
}

inline bool known_key(const std::string& k) {
  for (const auto& x : keys())
    if (k == x.name) return true;
  return false;
}

}  // namespace detail

using ConfigMap = std::map<std::string, std::string>;

// Parses the text form into raw key/value pairs. Unknown or repeated keys are errors.
inline ConfigMap parse_config_text(const std::string& text, const std::string& origin = "<config>") {
  ConfigMap m;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (!detail::known_key(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    if (m.count(key)) throw ConfigError(where + ": key '" + key + "' given twice");
    m[key] = val;
  }
  return m;
}

inline ConfigMap read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return parse_config_text(s.str(), path);
}

// Applies raw values on top of the defaults and validates the result.
inline RunConfig build_config(const ConfigMap& m) {
  RunConfig c;
  for (const auto& [key, v] : m) {
    if (key == "subcommand") c.subcommand = v;
    else if (key == "p") c.p = detail::to_double(key, v);
    else if (key == "N") c.N = detail::to_int(key, v);
    else if (key == "kind") c.kind = v;
    else if (key == "R1") c.R1 = detail::to_double(key, v);
    else if (key == "R2") c.R2 = detail::to_double(key, v);
    else if (key == "q") c.q = detail::to_double(key, v);
    else if (key == "r") c.r = detail::to_double(key, v);
    else if (key == "eta") c.eta = detail::to_double(key, v);
    else if (key == "f_table") c.f_table = v;
    else if (key == "d") c.d = detail::to_double(key, v);
    else if (key == "tol") c.tol = detail::to_double(key, v);
    else if (key == "kmax") c.kmax = detail::to_int(key, v);
    else if (key == "k") c.k = detail::to_int(key, v);
    else if (key == "grid") c.grid = detail::to_int(key, v);
    else if (key == "epsilon") c.epsilon = detail::to_double(key, v);
    else if (key == "s_max") c.s_max = detail::to_double(key, v);
    else if (key == "suite") c.suite = v;
    else if (key == "out") c.out = v;
    else if (key == "svg") c.svg = detail::to_bool(key, v);
    else if (key == "profiles") c.profiles = detail::to_bool(key, v);
    else throw ConfigError("unknown key '" + key + "'");
  }
  if (!m.count("kind")) c.kind = c.R1 > 0.0 ? "annulus" : "ball";

  bool sub_ok = false;
  for (const auto& s : subcommands()) sub_ok |= s == c.subcommand;
  if (!sub_ok) throw ConfigError("unknown subcommand '" + c.subcommand + "'");
  if (c.kind != "ball" && c.kind != "annulus") throw ConfigError("kind must be ball or annulus");
  if (c.kind == "ball" && c.R1 != 0.0) throw ConfigError("kind = ball requires R1 = 0");
  if (c.kind == "annulus" && !(c.R1 > 0.0 && c.R1 < c.R2)) throw ConfigError("kind = annulus requires 0 < R1 < R2");
  if (!(c.R2 > 0.0)) throw ConfigError("R2 must be positive");
  if (!(c.p > 1.0)) throw ConfigError("p must exceed 1");
  if (c.N < 1) throw ConfigError("N must be >= 1");
  if (!(c.eta > 0.0 && c.eta < 1.0)) throw ConfigError("eta must lie in (0, 1)");
  if (!(c.tol > 0.0 && c.tol < 1e-2)) throw ConfigError("tol must lie in (0, 1e-2)");
  if (c.kmax < 1) throw ConfigError("kmax must be >= 1");
  if (c.k < 1) throw ConfigError("k must be >= 1");
  if (c.grid < 8) throw ConfigError("grid must be >= 8");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (!(c.s_max >= 1e3)) throw ConfigError("s_max must be >= 1e3");
  if (c.suite != "ptrig" && c.suite != "appendix" && c.suite != "all")
    throw ConfigError("suite must be ptrig, appendix or all");
  if (!(c.d >= 0.0)) throw ConfigError("d must be >= 0");
  if (c.out.empty()) throw ConfigError("out must not be empty");
  return c;
}

// Canonical text form; parse_config_text(to_text(c)) rebuilds c exactly.
inline std::string to_text(const RunConfig& c) {
  std::ostringstream o;
  auto kv = [&](const char* k, const std::string& v) { o << k << (v.empty() ? " =" : " = ") << v << '\n'; };
  kv("subcommand", c.subcommand);
  kv("p", detail::fmt17(c.p));
  kv("N", std::to_string(c.N));
  kv("kind", c.kind);
  kv("R1", detail::fmt17(c.R1));
  kv("R2", detail::fmt17(c.R2));
  kv("q", detail::fmt17(c.q));
  kv("r", detail::fmt17(c.r));
  kv("eta", detail::fmt17(c.eta));
  kv("f_table", c.f_table);
  kv("d", detail::fmt17(c.d));
  kv("tol", detail::fmt17(c.tol));
  kv("kmax", std::to_string(c.kmax));
  kv("k", std::to_string(c.k));
  kv("grid", std::to_string(c.grid));
  kv("epsilon", detail::fmt17(c.epsilon));
  kv("s_max", detail::fmt17(c.s_max));
  kv("suite", c.suite);
  kv("out", c.out);
  kv("svg", c.svg ? "true" : "false");
  kv("profiles", c.profiles ? "true" : "false");
  return o.str();
}

// Flag parser shared by the CLI and the tests. After parse(), config() merges
// the --config file (if any) with the flags that were given.
class ConfigParser {
 public:
  ConfigParser() : app_("Radial p-Laplacian Neumann problems: shooting, eigenvalues, multiplicity") {
    app_.require_subcommand(1);
    app_.fallthrough();
    app_.name("plaplace");
    app_.add_option("--config", file_, "plain-text key = value file; flags override its values")->type_name("PATH");
    for (const auto& k : detail::keys()) {
      const std::string name = k.name;
      if (name == "subcommand") continue;
      if (name == "svg" || name == "profiles") {
        app_.add_flag("--" + name, flags_[name], k.help);
      } else {
        app_.add_option("--" + name, raw_[name], k.help)->type_name(k.type);
      }
    }
    const std::map<std::string, std::string> about = {
        {"check-f", "probe the growth hypotheses of f on a geometric grid"},
        {"shoot", "integrate one shot from u(R1) = d; writes trajectory.csv (and phase.svg with --svg)"},
        {"eigen", "radial Neumann eigenvalues k = 1..kmax; writes eigen.csv"},
        {"scan", "final angle over a grid of data; writes scan.csv"},
        {"solve", "non-constant radial solutions with j = 1..k zeros of u - 1; writes solutions.csv"},
        {"verify", "run an invariant suite (--suite ptrig | appendix | all)"},
        {"plot", "phase portrait of the shot from d; writes phase.svg"},
    };
    for (const auto& s : subcommands()) app_.add_subcommand(s, about.at(s));
  }

  CLI::App& app() { return app_; }

  void parse(std::vector<std::string> args) {
    std::reverse(args.begin(), args.end());
    app_.parse(args);
  }

  RunConfig config() const {
    ConfigMap m;
    if (!file_.empty()) m = read_config_file(file_);
    for (const auto& [name, val] : raw_)
      if (app_.count("--" + name) > 0) m[name] = val;
    for (const auto& [name, val] : flags_)
      if (app_.count("--" + name) > 0) m[name] = val ? "true" : "false";
    for (const auto* sub : app_.get_subcommands()) m["subcommand"] = sub->get_name();
    return build_config(m);
  }

 private:
  CLI::App app_;
  std::string file_;
  std::map<std::string, std::string> raw_;
  std::map<std::string, bool> flags_;
};

// Convenience for tests: args exclude the program name.
inline RunConfig parse_config(const std::vector<std::string>& args) {
  ConfigParser cp;
  try {
    cp.parse(args);
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string("command line: ") + e.what());
  }
  return cp.config();
}

}  // namespace plap
