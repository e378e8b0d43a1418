#pragma once

// Invariant suites behind `plaplace verify`. Each check records the measured
// value next to its limit so the table is self-explanatory.

#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "plap/eigen.hpp"
#include "plap/nonlinearity.hpp"
#include "plap/ptrig.hpp"
#include "plap/shooter.hpp"
#include "plap/spiral.hpp"

namespace plap {

struct Check {
  std::string suite;
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
  std::string note;
};

struct SuiteReport {
  std::vector<Check> checks;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
  void add(std::string suite, std::string name, double value, double limit, bool pass, std::string note = "") {
    checks.push_back({std::move(suite), std::move(name), value, limit, pass, std::move(note)});
  }
  // value <= limit
  void at_most(const std::string& suite, const std::string& name, double value, double limit) {
    add(suite, name, value, limit, value <= limit);
  }
  void append(const SuiteReport& o) { checks.insert(checks.end(), o.checks.begin(), o.checks.end()); }
};

inline void print_table(const SuiteReport& rep, std::ostream& os) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-10s %-52s %14s %14s  %s\n", "suite", "check", "value", "limit", "result");
  os << buf;
  for (const auto& c : rep.checks) {
    std::snprintf(buf, sizeof buf, "%-10s %-52s %14.6e %14.6e  %s", c.suite.c_str(), c.name.c_str(), c.value, c.limit,
                  c.pass ? "PASS" : "FAIL");
    os << buf;
    if (!c.note.empty()) os << "  (" << c.note << ")";
    os << '\n';
  }
}

namespace detail {

inline std::string pstr(const char* fmt, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, x);
  return buf;
}

// Runs body and turns an exception into a failed check.
inline void guarded(SuiteReport& rep, const std::string& suite, const std::string& name,
                    const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    rep.add(suite, name, std::nan(""), 0.0, false, e.what());
  }
}

}  // namespace detail

inline const std::vector<double>& ptrig_exponents() {
  static const std::vector<double> ps = {1.3, 1.5, 2.0, 2.5, 3.0, 4.0};
  return ps;
}

// max over n uniform angles in [0, 2 pi_p) of | |cos_p|^p + (p-1)|sin_p|^{p'} - 1 |
inline double ptrig_identity_defect(double p, int n = 1000) {
  const PTrigTable& T = *PTrigTable::shared(p);
  const double pp = p / (p - 1.0);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const CosSin z = T.eval(2.0 * T.pi_p() * i / n);
    worst = std::max(worst, std::fabs(std::pow(std::fabs(z.c), p) + (p - 1.0) * std::pow(std::fabs(z.s), pp) - 1.0));
  }
  return worst;
}

inline SuiteReport verify_ptrig() {
  SuiteReport rep;
  const std::string S = "ptrig";
  for (double p : ptrig_exponents()) {
    const std::string tag = detail::pstr("p=%g", p);
    detail::guarded(rep, S, tag, [&] {
      const PTrigTable& T = *PTrigTable::shared(p);
      const double pp = p / (p - 1.0), pi = T.pi_p();
      rep.at_most(S, "identity defect, 1000 angles, " + tag, ptrig_identity_defect(p), 1e-8);

      double dworst = 0.0;
      const double h = 1e-5;
      for (int i = 1; i < 200; ++i) {
        const double t = 2.0 * pi * i / 200.0 + 1e-3;
        const CosSin a = T.eval(t - h), b = T.eval(t + h), z = T.eval(t);
        dworst = std::max(dworst, std::fabs((b.c - a.c) / (2 * h) + phi_p(pp, z.s)));
        dworst = std::max(dworst, std::fabs((b.s - a.s) / (2 * h) - phi_p(p, z.c)));
      }
      rep.at_most(S, "derivative defect (central differences), " + tag, dworst, 1e-6);

      int bad = 0;
      for (int i = 1; i < 1000; ++i) {
        const double t = -pi / 2 + pi * i / 1000.0;
        if (!(T.cos_p(t) > 0.0)) ++bad;
        if (!(T.sin_p(pi * i / 1000.0) > 0.0)) ++bad;
      }
      rep.add(S, "sign pattern of cos_p and sin_p, " + tag, bad, 0, bad == 0);
    });
  }
  rep.at_most(S, "|pi_2 - pi|", std::fabs(compute_pi_p(2.0) - std::numbers::pi), 1e-10);
  return rep;
}

inline SuiteReport verify_nonlinearity() {
  SuiteReport rep;
  const std::string S = "f";
  struct Case {
    double p;
    int N;
    double q, r;
  };
  for (const Case c : {Case{2.0, 3, 4.0, 2.0}, Case{1.5, 3, 2.5, 2.0}, Case{3.0, 3, 4.0, 3.0}}) {
    const std::string tag = detail::pstr("p=%g ", c.p) + detail::pstr("q=%g ", c.q) + detail::pstr("r=%g", c.r);
    detail::guarded(rep, S, tag, [&] {
      const NonlinearitySpec spec = NonlinearitySpec::prototype(c.p, c.N, c.q, c.r);
      rep.at_most(S, "|Fhat(1)|, " + tag, std::fabs(eval_Fhat(spec, 1.0)), 1e-10);
      double neg = 0.0, quad_err = 0.0, mono = 0.0;
      double prev_fs = -kInf;
      for (int i = 0; i <= 400; ++i) {
        const double s = std::pow(10.0, -3.0 + 6.0 * i / 400.0);
        neg = std::max(neg, -eval_Fhat(spec, s));
        if (s >= 1.0) {
          const double fs = eval_fstar(spec, s);
          mono = std::max(mono, prev_fs - fs);
          prev_fs = fs;
        }
        if (s <= 10.0) {
          const double Fq = detail::quad([&](double t) { return eval_f(spec, t); }, 1.0, s);
          quad_err = std::max(quad_err, std::fabs(Fq - eval_F(spec, s)) / (1.0 + std::fabs(Fq)));
        }
      }
      rep.at_most(S, "max(-Fhat) on grid, " + tag, neg, 1e-10);
      rep.at_most(S, "f* decrease on grid, " + tag, mono, 1e-12);
      rep.at_most(S, "closed-form F vs quadrature, " + tag, quad_err, 1e-8);
      const HypothesisReport h = check_hypotheses(spec);
      rep.add(S, "(f_eq) verified on grid, " + tag, 0, 0, h.eq.status == Status::verified_on_grid,
              to_string(h.eq.status));
      rep.add(S, "(f_subc) verified on grid, " + tag, h.subc.value, spec.exponents().p_star,
              h.subc.status == Status::verified_on_grid, to_string(h.subc.status));
    });
  }
  return rep;
}

// Test matrix for the energy and Pohozaev checks: 3 exponents x 3 data x 3 geometries.
struct MatrixCase {
  Problem pb;
  double d;
  std::string label;
};

inline std::vector<MatrixCase> shooter_matrix() {
  struct PQ {
    double p, q, r;
  };
  std::vector<MatrixCase> out;
  for (const PQ e : {PQ{1.5, 2.5, 2.0}, PQ{2.0, 4.0, 2.0}, PQ{3.0, 4.0, 3.0}}) {
    for (int g = 0; g < 3; ++g) {
      const RadialDomain dom = g == 0   ? RadialDomain::ball(2.0, 3)
                               : g == 1 ? RadialDomain::annulus(1.0, 3.0, 2)
                                        : RadialDomain::ball(3.0, 1);
      const char* gname = g == 0 ? "ball N=3" : g == 1 ? "annulus N=2" : "interval";
      for (double d : {0.3, 2.0, 6.0}) {
        const Problem pb(dom, NonlinearitySpec::prototype(e.p, dom.N, e.q, e.r));
        out.push_back({pb, d, detail::pstr("p=%g ", e.p) + gname + detail::pstr(" d=%g", d)});
      }
    }
  }
  return out;
}

inline std::vector<double> pohozaev_constants(const Problem& pb) {
  const double ps = pb.spec.exponents().p_star;
  return {0.0, 1.0, -1.0, std::isfinite(ps) ? pb.N() / ps : 0.0};
}

inline SuiteReport verify_energy(double rel = 1e-7) {
  SuiteReport rep;
  const std::string S = "energy";
  double worst = 0.0;
  int bad = 0;
  std::string where;
  for (const auto& c : shooter_matrix()) {
    const Trajectory tr = integrate_cauchy(c.pb, c.d);
    const EnergyTrace et = energy_trace(c.pb, tr, rel);
    const double ratio = et.max_increase / (1.0 + et.values.front().H);
    if (ratio > worst) {
      worst = ratio;
      where = c.label;
    }
    if (!et.non_increasing) ++bad;
  }
  rep.add(S, "max H increase / (1 + H(R1)), 27 shots", worst, rel, bad == 0, where);
  return rep;
}

inline SuiteReport verify_pohozaev(double limit = 1e-6) {
  SuiteReport rep;
  const std::string S = "pohozaev";
  double worst = 0.0;
  std::string where;
  for (const auto& c : shooter_matrix()) {
    const Trajectory tr = integrate_cauchy(c.pb, c.d);
    for (double a : pohozaev_constants(c.pb)) {
      const double res = pohozaev_residual(c.pb, tr, a);
      if (!(res <= worst)) {
        worst = res;
        where = c.label + detail::pstr(" a=%g", a);
      }
    }
  }
  rep.add(S, "max Pohozaev residual, 27 shots x 4 constants", worst, limit, worst <= limit, where);
  return rep;
}

// 50 log-spaced data in (1.1 / eta, 1e3) on the p = 2, q = 4, r = 2 ball of radius 5.
inline SuiteReport verify_r0() {
  SuiteReport rep;
  const std::string S = "r0";
  const Problem pb(RadialDomain::ball(5.0, 3), NonlinearitySpec::prototype(2.0, 3, 4.0, 2.0, 0.5));
  const double lo = 1.1 / pb.spec.eta, hi = 1e3;
  double margin = kInf;
  int bad = 0;
  for (int i = 0; i < 50; ++i) {
    const double d = lo * std::pow(hi / lo, i / 49.0);
    const Trajectory tr = integrate_cauchy(pb, d);
    const double bound = r0_lower_bound(pb.domain, pb.spec, d);
    if (!tr.r0) {
      ++bad;
      continue;
    }
    margin = std::min(margin, *tr.r0 - bound);
    if (*tr.r0 < bound) ++bad;
  }
  rep.add(S, "min r0(d) - bound(d) over 50 data", margin, 0.0, bad == 0 && margin >= 0.0);
  return rep;
}

inline SuiteReport verify_eigen() {
  SuiteReport rep;
  const std::string S = "eigen";
  for (double p : {1.5, 2.0, 3.0}) {
    const std::string tag = detail::pstr("p=%g", p);
    detail::guarded(rep, S, tag, [&] {
      const RadialDomain dom = RadialDomain::ball(1.0, 1);
      const double pi = PTrigTable::shared(p)->pi_p();
      rep.add(S, "lambda_1 = 0, " + tag, find_eigenvalue(dom, p, 1).lambda, 0.0,
              find_eigenvalue(dom, p, 1).lambda == 0.0);
      double worst = 0.0;
      int zeros_bad = 0;
      for (int k = 2; k <= 5; ++k) {
        const EigenResult e = find_eigenvalue(dom, p, k);
        worst = std::max(worst, std::fabs(e.lambda / std::pow((k - 1) * pi, p) - 1.0));
        zeros_bad += e.zero_count != k - 1;
      }
      rep.at_most(S, "interval L=1 vs ((k-1) pi_p / L)^p, k=2..5, " + tag, worst, 1e-6);
      rep.add(S, "eigenfunction zero counts k-1, " + tag, zeros_bad, 0, zeros_bad == 0);
      double prev = -1.0;
      bool mono = true;
      const RadialDomain ball = RadialDomain::ball(1.0, 3);
      for (int k = 1; k <= 4; ++k) {
        const double l = find_eigenvalue(ball, p, k).lambda;
        mono &= l > prev;
        prev = l;
      }
      rep.add(S, "ball N=3 eigenvalues increasing, " + tag, 0, 0, mono);
    });
  }
  return rep;
}

// Spiral chain for spec, then the trajectory checks on the ball of radius
// ceil(1.05 R*) when that radius is at most r_limit.
inline SuiteReport verify_appendix(const NonlinearitySpec& spec, int k, double eps, double r_limit = 1e4,
                                   std::ostream* log = nullptr) {
  SuiteReport rep;
  const std::string S = "appendix";
  detail::guarded(rep, S, "spiral chain", [&] {
    const SpiralVerification ch = spiral_chain(spec, k, eps);
    if (log) {
      char buf[512];
      std::snprintf(buf, sizeof buf,
                    "chain k=%d eps=%g: l_check=%.6g < m_k=%.6g <= l*=%.6g <= M_k=%.6g < l_hat=%.6g < 1\n"
                    "delta*=%.6g  R*=%.6g\n",
                    ch.k, ch.epsilon, ch.ell_check, ch.m_k, ch.ell_star, ch.M_k, ch.ell_hat, ch.delta_star, ch.R_star);
      *log << buf;
    }
    const bool strict = ch.chain_found && 0.0 < ch.ell_check && ch.ell_check < ch.m_k && ch.m_k <= ch.ell_star &&
                        ch.ell_star <= ch.M_k && ch.M_k < ch.ell_hat && ch.ell_hat < 1.0;
    rep.add(S, "chain 0 < l_check < m_k <= l* <= M_k < l_hat < 1", ch.ell_star, 1.0, strict, ch.note);
    rep.add(S, "R* finite", ch.R_star, kInf, std::isfinite(ch.R_star) && ch.R_star > 0.0);
    if (!strict || !std::isfinite(ch.R_star)) return;
    if (ch.R_star > r_limit) {
      rep.add(S, "trajectory checks", ch.R_star, r_limit, true, "skipped: R* beyond the radius limit");
      return;
    }
    const double R2 = std::ceil(1.05 * ch.R_star);
    const Problem pb(RadialDomain::ball(R2, spec.N), spec);
    const SpiralVerification sv = spiral_verify(pb, k, eps);
    if (log && sv.d_hat) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "R2=%g  d_tilde=%.10g  d_hat=%.10g  phi gain=%.6g pi_p\n", R2,
                    sv.d_tilde.value_or(std::nan("")), *sv.d_hat, sv.phi_gain / pb.pi_p());
      *log << buf;
    }
    rep.add(S, "d_hat found in (1, d_tilde)", sv.d_hat.value_or(std::nan("")), sv.d_tilde.value_or(std::nan("")),
            sv.d_hat.has_value() && sv.d_tilde && *sv.d_hat > 1.0 && *sv.d_hat < *sv.d_tilde);
    rep.at_most(S, "| l_dhat(eps R2) - l* |", std::fabs(sv.ell_at_eps - sv.ell_star), 1e-9);
    rep.add(S, "sandwich l_- <= l <= l_+ along the d_hat shot", sv.sandwich_worst, SpiralOptions{}.sandwich_tol,
            sv.sandwich_checked && sv.sandwich_passed);
    rep.add(S, "phi(R2) - phi(eps R2) > k pi_p", sv.phi_gain, k * pb.pi_p(), sv.final_claim);
  });
  return rep;
}

// The instance used by `verify all`: p = 1.5, q = 2.5, r = 2 on an interval, eps = 0.1.
inline NonlinearitySpec appendix_instance() { return NonlinearitySpec::prototype(1.5, 1, 2.5, 2.0); }

inline SuiteReport verify_all(std::ostream* log = nullptr) {
  SuiteReport rep;
  rep.append(verify_ptrig());
  rep.append(verify_nonlinearity());
  detail::guarded(rep, "shooter", "matrix", [&] {
    rep.append(verify_energy());
    rep.append(verify_pohozaev());
    rep.append(verify_r0());
  });
  rep.append(verify_eigen());
  rep.append(verify_appendix(appendix_instance(), 1, 0.1, 1e4, log));
  return rep;
}

}  // namespace plap
