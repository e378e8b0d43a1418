#pragma once

// Spiral comparison curves around (1, 0) and the radius R*(k, eps) beyond
// which some d_hat in (1, d*) performs more than k half-turns.
//
// Rescaled momentum w = R2^{1-N} v, polar-like coordinates
//   u - 1 = l^{2/p} cos_p(phi),  w = -l^{2/p'} sin_p(phi),
// comparison curves dl/dphi = l M_pm(u, w) with exponent weight a = eps^{(N-1)p'}.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "plap/errors.hpp"
#include "plap/multiplicity.hpp"
#include "plap/ode.hpp"
#include "plap/parallel.hpp"
#include "plap/ptrig.hpp"
#include "plap/shooter.hpp"

namespace plap {

struct SpiralOptions {
  int phi_samples = 64;
  int ell_candidates = 40;
  double ell_min = 1e-3;  // candidate range for l*
  double ell_max = 0.95;
  int delta_grid = 256;
  double gap = 0.02;  // relative gap between m_k and l_check, and between M_k and l_hat
  double tol = 1e-11;
  double sandwich_tol = 1e-7;
};

struct SpiralVerification {
  int k = 1;
  double epsilon = 0.1;
  bool chain_found = false;  // (choice) chain with strict inequalities
  double ell_check = 0.0, ell_star = 0.0, ell_hat = 0.0;
  double m_k = 0.0, M_k = 0.0;
  double delta_star = 0.0;
  double R_star = std::numeric_limits<double>::infinity();
  // trajectory part (needs a domain with R1 < eps R2)
  std::optional<double> d_tilde;
  std::optional<double> d_hat;
  double ell_at_eps = 0.0;  // l_{d_hat}(eps R2)
  double r_bar = 0.0;
  double phi_gain = 0.0;  // phi(R2) - phi(eps R2)
  bool final_claim = false;
  bool sandwich_checked = false;
  bool sandwich_passed = false;
  double sandwich_worst = 0.0;  // max of l / l_plus - 1 and 1 - l / l_minus over the check
  std::string note;
};

namespace detail {

struct SpiralModel {
  const NonlinearitySpec* spec;
  const PTrigTable* T;
  double p, pp, a;

  // M_pm at (u, w); t is the weight selected on each quadrant pair
  double M(bool plus, double u, double w) const {
    const double e = u - 1.0;
    const bool same = w * e >= 0.0;
    const double t = (plus == same) ? a : 1.0;
    const double fh = eval_fhat_offset(*spec, e);
    const double den = (p - 1.0) * std::pow(std::fabs(w), pp) + t * fh * e;
    if (den == 0.0) return 0.0;
    return 0.5 * p * phi_pow(w, pp - 1.0) * (phi_pow(e, p - 1.0) - t * fh) / den;
  }
  double M_polar(bool plus, double ell, double phi) const {
    const CosSin cs = T->eval(phi);
    return M(plus, 1.0 + std::pow(ell, 2.0 / p) * cs.c, -std::pow(ell, 2.0 / pp) * cs.s);
  }
};

}  // namespace detail

inline double spiral_weight(int N, double p, double eps) {
  return N == 1 ? 1.0 : std::pow(eps, (N - 1) * p / (p - 1.0));
}

inline double spiral_M(const NonlinearitySpec& spec, double eps, bool plus, double u, double w) {
  const auto T = PTrigTable::shared(spec.p);
  const detail::SpiralModel m{&spec, T.get(), spec.p, spec.p / (spec.p - 1.0), spiral_weight(spec.N, spec.p, eps)};
  return m.M(plus, u, w);
}

// S and U of the rescaled polar system at radius r on a domain with outer radius R2.
inline double spiral_S(const NonlinearitySpec& spec, double R2, double r, double u, double w) {
  const double p = spec.p, pp = p / (p - 1.0);
  const int N = spec.N;
  const double e = u - 1.0;
  const double t = std::pow(r / R2, (N - 1) * pp);
  const double s = std::pow(R2 / r, (N - 1) * (pp - 1.0));
  const double l2 = std::pow(std::fabs(e), p) + (p - 1.0) * std::pow(std::fabs(w), pp);
  return 0.5 * p * s * phi_pow(w, pp - 1.0) * (phi_pow(e, p - 1.0) - t * eval_fhat_offset(spec, e)) / l2;
}

inline double spiral_U(const NonlinearitySpec& spec, double R2, double r, double u, double w) {
  const double p = spec.p, pp = p / (p - 1.0);
  const int N = spec.N;
  const double e = u - 1.0;
  const double t = std::pow(r / R2, (N - 1) * pp);
  const double s = std::pow(R2 / r, (N - 1) * (pp - 1.0));
  const double l2 = std::pow(std::fabs(e), p) + (p - 1.0) * std::pow(std::fabs(w), pp);
  return s * ((p - 1.0) * std::pow(std::fabs(w), pp) + t * eval_fhat_offset(spec, e) * e) / l2;
}

// One comparison curve l_pm(phi; l_bar, phi_bar) on [phi_bar, phi_bar + span],
// integrated as log l with restarts at the quadrant boundaries.
class SpiralCurve {
 public:
  double phi0 = 0.0, span = 0.0;
  double min_ell = 0.0, max_ell = 0.0;
  bool escaped = false;  // l reached 1

  double operator()(double phi) const {
    if (steps_.empty()) return std::exp(y0_);
    if (phi <= steps_.front().t0) return std::exp(steps_.front().component(0, steps_.front().t0));
    if (phi >= steps_.back().t1()) return std::exp(steps_.back().component(0, steps_.back().t1()));
    auto it = std::upper_bound(steps_.begin(), steps_.end(), phi, [](double x, const DenseStep<1>& s) { return x < s.t0; });
    return std::exp((it - 1)->component(0, phi));
  }
  double end_phi() const { return steps_.empty() ? phi0 : steps_.back().t1(); }

  static SpiralCurve build(const detail::SpiralModel& m, bool plus, double ell_bar, double phi_bar, double span,
                           double tol, bool keep) {
    SpiralCurve c;
    c.phi0 = phi_bar;
    c.span = span;
    c.y0_ = std::log(ell_bar);
    c.min_ell = c.max_ell = ell_bar;
    const double q = 0.5 * m.T->pi_p();
    auto rhs = [&](double phi, const Vec<1>& y, Vec<1>& dy) { dy[0] = m.M_polar(plus, std::exp(y[0]), phi); };
    StepControl ctl;
    ctl.rtol = tol;
    ctl.atol = tol;
    auto solver = make_dop853<1>(rhs, ctl);
    double phi = phi_bar, y = c.y0_;
    const double end = phi_bar + span;
    while (phi < end && !c.escaped) {
      // next quadrant boundary strictly after phi
      double nb = q * (std::floor(phi / q + 1e-12) + 1.0);
      if (nb - phi < 1e-14 * (1.0 + std::fabs(phi))) nb += q;
      const double stop = std::min(nb, end);
      const auto res = solver.integrate(phi, Vec<1>{y}, stop, [&](const DenseStep<1>& ds, const Vec<1>& y1) {
        for (int kk = 1; kk <= 4; ++kk) {
          const double l = std::exp(ds.component(0, ds.t0 + ds.h * kk / 4.0));
          c.min_ell = std::min(c.min_ell, l);
          c.max_ell = std::max(c.max_ell, l);
        }
        if (keep) c.steps_.push_back(ds);
        if (y1[0] >= 0.0) {
          c.escaped = true;
          return false;
        }
        return true;
      });
      phi = res.t;
      y = res.y[0];
    }
    return c;
  }

 private:
  double y0_ = 0.0;
  std::vector<DenseStep<1>> steps_;
};

struct SpiralBounds {
  double m = 0.0;  // inf of l_minus
  double M = 0.0;  // sup of l_plus
  bool escaped = false;
};

inline SpiralBounds spiral_bounds(const NonlinearitySpec& spec, double eps, int k, double ell_bar,
                                  const SpiralOptions& opt = {}) {
  const auto T = PTrigTable::shared(spec.p);
  const detail::SpiralModel m{&spec, T.get(), spec.p, spec.p / (spec.p - 1.0), spiral_weight(spec.N, spec.p, eps)};
  const double pi_p = T->pi_p();
  const int n = opt.phi_samples;
  struct Pair {
    double lo, hi;
    bool esc;
  };
  const auto res = parallel_map<Pair>(static_cast<std::size_t>(n), [&](std::size_t i) {
    const double phi_bar = 2.0 * pi_p * static_cast<double>(i) / n;
    const SpiralCurve lm = SpiralCurve::build(m, false, ell_bar, phi_bar, k * pi_p, opt.tol, false);
    const SpiralCurve lp = SpiralCurve::build(m, true, ell_bar, phi_bar, k * pi_p, opt.tol, false);
    return Pair{lm.min_ell, lp.max_ell, lp.escaped || lm.escaped};
  });
  SpiralBounds b{ell_bar, ell_bar, false};
  for (const auto& r : res) {
    b.m = std::min(b.m, r.lo);
    b.M = std::max(b.M, r.hi);
    b.escaped = b.escaped || r.esc;
  }
  return b;
}

namespace detail {

// quotient minimised for delta*_k, in polar form
inline double delta_quotient(const SpiralModel& m, double ell, double phi) {
  const CosSin cs = m.T->eval(phi);
  const double e = std::pow(ell, 2.0 / m.p) * cs.c;
  return (m.p - 1.0) * std::pow(std::fabs(cs.s), m.pp) + m.a * eval_fhat_offset(*m.spec, e) * e / (ell * ell);
}

}  // namespace detail

// inf of the quotient over the annulus l_check <= l <= l_hat: tensor grid, then
// coordinate descent from the best node.
inline double delta_star(const NonlinearitySpec& spec, double eps, double ell_check, double ell_hat, int n = 256) {
  const auto T = PTrigTable::shared(spec.p);
  const detail::SpiralModel m{&spec, T.get(), spec.p, spec.p / (spec.p - 1.0), spiral_weight(spec.N, spec.p, eps)};
  const double period = 2.0 * T->pi_p();
  double best = std::numeric_limits<double>::infinity(), bl = ell_check, bphi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double ell = ell_check + (ell_hat - ell_check) * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double phi = period * j / n;
      const double qv = detail::delta_quotient(m, ell, phi);
      if (qv < best) {
        best = qv;
        bl = ell;
        bphi = phi;
      }
    }
  }
  double hl = (ell_hat - ell_check) / (n - 1), hp = period / n;
  for (int sweep = 0; sweep < 60 && (hl > 1e-15 || hp > 1e-15); ++sweep) {
    bool moved = false;
    for (const auto& [dl, dp] : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
      const double l = std::clamp(bl + dl * hl, ell_check, ell_hat);
      const double ph = bphi + dp * hp;
      const double qv = detail::delta_quotient(m, l, ph);
      if (qv < best) {
        best = qv;
        bl = l;
        bphi = ph;
        moved = true;
      }
    }
    if (!moved) {
      hl *= 0.5;
      hp *= 0.5;
    }
  }
  return best;
}

// Chain search: a log grid of l* candidates; each admissible one gets
// l_check = (1 - gap) m_k, l_hat = M_k + gap (1 - M_k), and the candidate with
// the smallest R* is kept.
inline SpiralVerification spiral_chain(const NonlinearitySpec& spec, int k, double eps, const SpiralOptions& opt = {}) {
  if (k < 1) throw DomainError("k must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  SpiralVerification out;
  out.k = k;
  out.epsilon = eps;
  const double pi_p = PTrigTable::shared(spec.p)->pi_p();
  const int n = opt.ell_candidates;
  for (int i = 0; i < n; ++i) {
    const double ell = n == 1 ? opt.ell_min
                              : std::exp(std::log(opt.ell_min) + (std::log(opt.ell_max) - std::log(opt.ell_min)) * i / (n - 1));
    const SpiralBounds b = spiral_bounds(spec, eps, k, ell, opt);
    if (b.escaped || !(b.M < 1.0) || !(b.m > 0.0)) continue;
    const double lc = (1.0 - opt.gap) * b.m;
    const double lh = b.M + opt.gap * (1.0 - b.M);
    if (!(0.0 < lc && lc < b.m && b.m <= ell && ell <= b.M && b.M < lh && lh < 1.0)) continue;
    const double ds = delta_star(spec, eps, lc, lh, opt.delta_grid);
    if (!(ds > 0.0)) continue;
    const double R = k * pi_p / ((1.0 - eps) * ds);
    if (!out.chain_found || R < out.R_star) {
      out.chain_found = true;
      out.ell_check = lc;
      out.ell_star = ell;
      out.ell_hat = lh;
      out.m_k = b.m;
      out.M_k = b.M;
      out.delta_star = ds;
      out.R_star = R;
    }
  }
  if (!out.chain_found) out.note = "no admissible (l_check, l*, l_hat)";
  return out;
}

namespace detail {

inline double ell_of(const Problem& pb, double e, double v) {
  const double w = v * std::pow(pb.domain.R2, 1.0 - pb.N());
  return std::sqrt(PTrigTable::radius_sq(pb.p(), e, w));
}

inline double ell_at(const Problem& pb, double d, double r, double rtol) {
  ShootOptions o;
  o.rtol = rtol;
  o.atol = rtol * 1e-2;
  o.keep_dense = false;
  o.track_angle = false;
  o.r_stop = r;
  const Trajectory tr = integrate_cauchy(pb, d, o);
  return ell_of(pb, tr.samples.back().e, tr.samples.back().v);
}

}  // namespace detail

inline std::vector<double> default_tilde_grid() {
  std::vector<double> g;
  for (double d = 1.25; d <= 1e4; d *= 1.25) g.push_back(d);
  return g;
}

// Full pipeline on a domain: chain, d_tilde, d_hat with l_{d_hat}(eps R2) = l*,
// and the sandwich l_minus <= l <= l_plus along [eps R2, r_bar].
inline SpiralVerification spiral_verify(const Problem& pb, int k, double eps, std::vector<double> tilde_grid = {},
                                        const SpiralOptions& opt = {}) {
  const RadialDomain& dom = pb.domain;
  if (!(dom.R1 < eps * dom.R2)) throw DomainError("spiral verification needs R1 < eps R2");
  SpiralVerification out = spiral_chain(pb.spec, k, eps, opt);
  if (!out.chain_found) return out;
  if (tilde_grid.empty()) tilde_grid = default_tilde_grid();
  std::sort(tilde_grid.begin(), tilde_grid.end());
  const double rt = 1e-12;
  const double r_eps = eps * dom.R2;
  for (double d : tilde_grid) {
    if (!(d > 1.0)) continue;
    if (detail::ell_at(pb, d, r_eps, rt) > 1.0) {
      out.d_tilde = d;
      break;
    }
  }
  if (!out.d_tilde) {
    out.note = "no d_tilde with l(eps R2) > 1 on the grid";
    return out;
  }
  // first crossing of l* on a log grid in d - 1, then bisection in log(d - 1)
  const double top = std::log(*out.d_tilde - 1.0);
  const double bottom = std::log(1e-10);
  double xlo = bottom, xhi = top;
  const int m = 200;
  for (int i = 1; i <= m; ++i) {
    const double x = bottom + (top - bottom) * i / m;
    if (detail::ell_at(pb, 1.0 + std::exp(x), r_eps, rt) > out.ell_star) {
      xhi = x;
      xlo = bottom + (top - bottom) * (i - 1) / m;
      break;
    }
  }
  for (int it = 0; it < 200 && xhi - xlo > 1e-14; ++it) {
    const double x = 0.5 * (xlo + xhi);
    if (detail::ell_at(pb, 1.0 + std::exp(x), r_eps, rt) > out.ell_star) xhi = x;
    else xlo = x;
  }
  const double dh = 1.0 + std::exp(0.5 * (xlo + xhi));
  out.d_hat = dh;

  // d_hat trajectory in the rescaled variables
  ShootOptions o;
  o.rtol = rt;
  o.atol = rt * 1e-2;
  const Trajectory tr = integrate_cauchy(pb, dh, o);
  const PTrigTable& T = *pb.trig;
  const double pi_p = pb.pi_p();
  const double wscale = std::pow(dom.R2, 1.0 - pb.N());
  struct Pt {
    double r, ell, phi;
  };
  std::vector<Pt> pts;
  double phi = 0.0;
  auto push = [&](double r, const Vec<2>& z) {
    const double w = z[1] * wscale;
    if (z[0] != 0.0 || w != 0.0) phi = detail::unwrap(T.angle(z[0], -w), phi, 2.0 * pi_p);
    pts.push_back({r, detail::ell_of(pb, z[0], z[1]), phi});
  };
  push(tr.samples.front().r, {tr.samples.front().e, tr.samples.front().v});
  if (tr.startup) push(tr.samples[1].r, {tr.samples[1].e, tr.samples[1].v});
  for (const auto& ds : tr.dense)
    for (int kk = 1; kk <= 8; ++kk) {
      const double r = kk == 8 ? ds.t1() : ds.t0 + ds.h * kk / 8.0;
      push(r, ds(r));
    }
  const Vec<2> ze = tr.state_at(r_eps);
  out.ell_at_eps = detail::ell_of(pb, ze[0], ze[1]);
  double phi_eps = 0.0;
  {
    // angle at eps R2 from the nearest preceding point
    auto it = std::lower_bound(pts.begin(), pts.end(), r_eps, [](const Pt& a, double r) { return a.r < r; });
    const double prev = it == pts.begin() ? 0.0 : (it - 1)->phi;
    phi_eps = detail::unwrap(T.angle(ze[0], -ze[1] * wscale), prev, 2.0 * pi_p);
  }
  out.phi_gain = pts.back().phi - phi_eps;
  out.final_claim = out.phi_gain > k * pi_p;

  const auto Tp = PTrigTable::shared(pb.p());
  const detail::SpiralModel model{&pb.spec, Tp.get(), pb.p(), pb.p_prime(), spiral_weight(pb.N(), pb.p(), eps)};
  const SpiralCurve up = SpiralCurve::build(model, true, out.ell_star, phi_eps, k * pi_p, opt.tol, true);
  const SpiralCurve lo = SpiralCurve::build(model, false, out.ell_star, phi_eps, k * pi_p, opt.tol, true);
  out.r_bar = dom.R2;
  out.sandwich_checked = true;
  out.sandwich_passed = true;
  out.sandwich_worst = 0.0;
  for (const Pt& x : pts) {
    if (x.r < r_eps) continue;
    if (x.ell < out.ell_check || x.ell > out.ell_hat) {
      out.r_bar = x.r;
      break;
    }
    if (x.phi > phi_eps + k * pi_p || x.phi > up.end_phi() || x.phi > lo.end_phi()) continue;
    const double hi_dev = x.ell / up(x.phi) - 1.0;
    const double lo_dev = 1.0 - x.ell / lo(x.phi);
    out.sandwich_worst = std::max({out.sandwich_worst, hi_dev, lo_dev});
  }
  out.sandwich_passed = out.sandwich_worst <= opt.sandwich_tol;
  return out;
}

}  // namespace plap
