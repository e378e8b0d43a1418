#pragma once

// Subcommand dispatch for the plaplace tool. Exit codes: 0 ok, 1 verification
// failure, 2 configuration or I/O error, 3 numeric error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include "plap/config.hpp"
#include "plap/eigen.hpp"
#include "plap/io.hpp"
#include "plap/multiplicity.hpp"
#include "plap/nonlinearity.hpp"
#include "plap/verify.hpp"

namespace plap {

enum ExitCode : int { exit_ok = 0, exit_verify = 1, exit_config = 2, exit_numeric = 3 };

namespace cli {

inline std::filesystem::path out_path(const RunConfig& c, const std::string& name) {
  return std::filesystem::path(c.out) / name;
}

inline void save_config(const RunConfig& c) {
  write_file(out_path(c, "config.txt"), [&](std::ostream& os) { os << to_text(c); });
}

inline std::string g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline int check_f(const RunConfig& c, std::ostream& out) {
  const NonlinearitySpec spec = c.nonlinearity();
  ProbeGrid pg;
  pg.s_max = c.s_max;
  const HypothesisReport h = check_hypotheses(spec, pg);
  auto row = [&](const char* name, const HypothesisStatus& s) {
    out << name << ": " << to_string(s.status);
    if (s.witness) out << "  witness s=" << g(*s.witness);
    if (!s.note.empty()) out << "  " << s.note;
    out << '\n';
  };
  row("(f_reg)", h.reg);
  row("(f_eq)", h.eq);
  row("(f_0)", h.zero);
  row("(f_subl)", h.subl);
  row("(f_subc)", h.subc);
  out << "eta = " << g(h.eta) << "  p* = " << g(spec.exponents().p_star) << '\n';
  if (h.subl.status == Status::verified_on_grid) out << "M = " << g(h.M) << '\n';
  if (h.fit) out << "subcritical fit: eps = " << g(h.fit->epsilon) << "  C_eps = " << g(h.fit->C_eps) << '\n';
  try {
    out << "C1 = " << g(compute_c1(spec)) << '\n';
  } catch (const InconclusiveError& e) {
    out << "C1: inconclusive (" << e.what() << ")\n";
  }
  return h.eq.status == Status::violated ? exit_verify : exit_ok;
}

inline int shoot(const RunConfig& c, std::ostream& out, bool csv, bool svg) {
  const Problem pb = c.problem();
  ShootOptions o;
  o.rtol = c.tol;
  const Trajectory tr = integrate_cauchy(pb, c.d, o);
  save_config(c);
  if (csv) write_file(out_path(c, "trajectory.csv"), [&](std::ostream& os) { trajectory_csv(pb, tr, os); });
  if (svg) write_file(out_path(c, "phase.svg"), [&](std::ostream& os) { svg_phase_portrait(pb, tr, os); });
  const auto& last = tr.samples.back();
  out << "d = " << g(c.d) << "  steps = " << tr.steps << "  samples = " << tr.samples.size() << '\n';
  out << "u(R2) = " << g(last.u()) << "  v(R2) = " << g(last.v) << '\n';
  if (tr.theta_defined) out << "half-turns = " << g(tr.delta_theta() / pb.pi_p()) << '\n';
  if (tr.u_vanishes) out << "first zero of u at r = " << g(tr.r1) << '\n';
  return exit_ok;
}

inline int eigen(const RunConfig& c, std::ostream& out) {
  const RadialDomain dom = c.domain();
  std::vector<EigenResult> res;
  for (int k = 1; k <= c.kmax; ++k) res.push_back(find_eigenvalue(dom, c.p, k));
  save_config(c);
  write_file(out_path(c, "eigen.csv"), [&](std::ostream& os) { eigen_csv(res, os); });
  for (const auto& e : res) {
    out << "k = " << e.k << "  lambda = " << g(e.lambda) << "  zeros = " << e.zero_count << '\n';
    if (c.profiles) {
      const Eigenfunction ef = eigenfunction(dom, c.p, e.lambda);
      write_file(out_path(c, "eigenfunction_" + std::to_string(e.k) + ".csv"),
                 [&](std::ostream& os) { eigenfunction_csv(ef, os); });
    }
  }
  return exit_ok;
}

inline int scan(const RunConfig& c, std::ostream& out) {
  const Problem pb = c.problem();
  const double ds = estimate_d_star(pb);
  std::vector<double> grid = grid_above(2.0 * ds, c.grid, 1e-6);
  const auto below = grid_below(c.grid, 1e-6, 1e-6);
  grid.insert(grid.end(), below.begin(), below.end());
  const ScanReport rep = scan_theta(pb, grid, c.k, ds, c.tol);
  save_config(c);
  write_file(out_path(c, "scan.csv"), [&](std::ostream& os) { scan_csv(rep, os); });
  out << "d* = " << g(ds) << "  grid = " << rep.d_grid.size() << "  brackets = " << rep.brackets.size() << '\n';
  if (rep.d_hat) out << "d_hat = " << g(*rep.d_hat) << '\n';
  if (rep.d_hat_below) out << "d_hat (below 1) = " << g(*rep.d_hat_below) << '\n';
  return exit_ok;
}

inline SolveResult solve_problem(const RunConfig& c) {
  SolveOptions o;
  o.k = c.k;
  o.grid = c.grid;
  o.scan_rtol = c.tol;
  return find_solutions(c.problem(), o);
}

// Writes solutions.csv, scan.csv and one profile per record.
inline void write_solution_files(const RunConfig& c, const SolveResult& res) {
  write_file(out_path(c, "solutions.csv"), [&](std::ostream& os) { solutions_csv(res.records, os); });
  write_file(out_path(c, "scan.csv"), [&](std::ostream& os) { scan_csv(res.scan, os); });
  for (std::size_t i = 0; i < res.records.size(); ++i)
    write_file(out_path(c, profile_name(res.records[i], i)),
               [&](std::ostream& os) { profile_csv(res.records[i], os); });
}

inline int solve(const RunConfig& c, std::ostream& out) {
  const SolveResult res = solve_problem(c);
  save_config(c);
  write_solution_files(c, res);
  for (const auto& w : res.warnings) out << "warning: " << w << '\n';
  out << "d* = " << g(res.scan.d_star) << "  C = " << g(res.bound) << "  records = " << res.records.size() << '\n';
  bool ok = true;
  for (const auto& r : res.records) {
    const bool n_ok = neumann_ok(r);
    ok &= n_ok;
    out << "d = " << g(r.d) << "  " << to_string(r.side) << "  " << to_string(r.branch) << "  j = " << r.j
        << "  |v(R2)| = " << g(r.residual) << (n_ok ? "" : "  NEUMANN DEFECT") << '\n';
  }
  return ok ? exit_ok : exit_verify;
}

inline int verify(const RunConfig& c, std::ostream& out) {
  SuiteReport rep;
  if (c.suite == "ptrig") {
    rep = verify_ptrig();
  } else if (c.suite == "appendix") {
    rep = verify_appendix(c.nonlinearity(), c.k, c.epsilon, 1e4, &out);
  } else {
    rep = verify_all(&out);
  }
  print_table(rep, out);
  out << (rep.ok() ? "all checks passed" : "some checks FAILED") << '\n';
  return rep.ok() ? exit_ok : exit_verify;
}

}  // namespace cli

// args exclude the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  ConfigParser parser;
  try {
    parser.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = parser.app().exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }
  // parameters are checked before any computation; failures there are config errors
  RunConfig c;
  try {
    c = parser.config();
    if (c.subcommand == "check-f") (void)c.nonlinearity();
    else if (c.subcommand == "eigen") (void)c.domain();
    else if (c.subcommand != "verify" || c.suite == "appendix") (void)c.problem();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const DomainError& e) {
    err << "invalid parameters: " << e.what() << '\n';
    return exit_config;
  }
  try {
    if (c.subcommand == "check-f") return cli::check_f(c, out);
    if (c.subcommand == "shoot") return cli::shoot(c, out, true, c.svg);
    if (c.subcommand == "plot") return cli::shoot(c, out, false, true);
    if (c.subcommand == "eigen") return cli::eigen(c, out);
    if (c.subcommand == "scan") return cli::scan(c, out);
    if (c.subcommand == "solve") return cli::solve(c, out);
    return cli::verify(c, out);
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    err << "numeric error: " << e.what() << '\n';
    return exit_numeric;
  }
}

}  // namespace plap
