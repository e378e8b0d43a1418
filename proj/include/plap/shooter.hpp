#pragma once

// Shooting from (u, v)(R1) = (d, 0) for
//   u' = phi_{p'}(v / r^{N-1}),   v' = -r^{N-1} fhat(u),
// with v = r^{N-1} phi_p(u'). The state is carried as (u - 1, v) so that data
// very close to the constant solution keep their relative accuracy.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "plap/errors.hpp"
#include "plap/nonlinearity.hpp"
#include "plap/ode.hpp"
#include "plap/ptrig.hpp"

namespace plap {

struct RadialDomain {
  enum class Kind { ball, annulus };
  Kind kind = Kind::ball;
  double R1 = 0.0;
  double R2 = 1.0;
  int N = 3;

  static RadialDomain ball(double R2, int N) {
    RadialDomain d{Kind::ball, 0.0, R2, N};
    d.validate();
    return d;
  }
  static RadialDomain annulus(double R1, double R2, int N) {
    RadialDomain d{Kind::annulus, R1, R2, N};
    d.validate();
    return d;
  }

  bool is_ball() const { return kind == Kind::ball; }

  void validate() const {
    if (N < 1) throw DomainError("dimension N must be >= 1");
    if (!(R2 > 0.0) || !std::isfinite(R2)) throw DomainError("R2 must be finite and positive");
    if (kind == Kind::ball && R1 != 0.0) throw DomainError("a ball has R1 = 0");
    if (kind == Kind::annulus && !(R1 > 0.0 && R1 < R2)) throw DomainError("an annulus needs 0 < R1 < R2");
  }
};

// Everything a shot needs; cheap to copy.
struct Problem {
  RadialDomain domain;
  NonlinearitySpec spec;
  std::shared_ptr<const PTrigTable> trig;

  bool supercritical = false;  // accepted only through exploratory()

  Problem() = default;
  Problem(RadialDomain dom, NonlinearitySpec s, bool allow_supercritical = false) : domain(dom), spec(std::move(s)) {
    domain.validate();
    if (spec.N != domain.N) throw DomainError("dimension of the nonlinearity and the domain differ");
    spec.validate(false);
    if (domain.is_ball()) {
      if (const Prototype* pr = spec.proto(); pr && !(pr->q < spec.exponents().p_star)) {
        if (!allow_supercritical) spec.validate(true);
        supercritical = true;
      }
    }
    trig = PTrigTable::shared(spec.p);
  }

  // Best-effort problem on a ball with a non-subcritical prototype.
  static Problem exploratory(RadialDomain dom, NonlinearitySpec s) { return Problem(dom, std::move(s), true); }

  double p() const { return spec.p; }
  double p_prime() const { return spec.p / (spec.p - 1.0); }
  double pi_p() const { return trig->pi_p(); }
  int N() const { return domain.N; }
};

struct PhaseState {
  double r = 0.0;
  double u = 0.0;
  double v = 0.0;
};

struct TrajectorySample {
  double r = 0.0;
  double e = 0.0;  // u - 1
  double v = 0.0;
  double rho = 0.0;
  double theta = 0.0;
  double u() const { return 1.0 + e; }
};

struct ShootOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  // stop once theta - theta(R1) exceeds this
  double theta_cap = std::numeric_limits<double>::infinity();
  // stop at the first r > R1 with v >= 0
  bool stop_when_v_nonneg = false;
  bool keep_dense = true;
  bool track_angle = true;
  // integrate only up to this radius (NaN: R2)
  double r_stop = std::numeric_limits<double>::quiet_NaN();
};

// Startup expansion at the centre of a ball, valid on [0, delta0].
struct BallStartup {
  double delta0 = 0.0;
  double e0 = 0.0;
  double fd = 0.0;  // fhat(d)
  double p_prime = 2.0;
  int N = 3;

  double e_at(double r) const { return e0 - std::pow(r, p_prime) / p_prime * phi_pow(fd / N, p_prime - 1.0); }
  double v_at(double r) const { return -std::pow(r, N) * fd / N; }
};

class Trajectory {
 public:
  double d = 1.0;
  bool constant = false;       // d = 1
  bool theta_defined = true;   // false for the constant trajectory
  bool truncated = false;      // stopped before R2 on request
  double R1 = 0.0, R2 = 1.0;
  int N = 3;
  double p = 2.0;
  double theta_start = 0.0;
  std::optional<double> r0;  // first r with u <= eta d; tracked when d > 1/eta
  double r1 = 0.0;           // first zero of u, or the end radius
  bool u_vanishes = false;   // r1 is a genuine zero
  std::optional<BallStartup> startup;
  std::vector<TrajectorySample> samples;
  std::vector<DenseStep<2>> dense;
  long steps = 0;

  double r_end() const { return samples.back().r; }
  double theta_end() const { return samples.back().theta; }
  double delta_theta() const { return theta_end() - theta_start; }

  // (u - 1, v) at r from the dense output.
  Vec<2> state_at(double r) const {
    if (constant) return {0.0, 0.0};
    if (startup && r <= startup->delta0) return {startup->e_at(r), startup->v_at(r)};
    if (dense.empty()) {
      if (samples.empty()) throw DomainError("empty trajectory");
      return {samples.front().e, samples.front().v};
    }
    if (r <= dense.front().t0) return dense.front()(dense.front().t0);
    if (r >= dense.back().t1()) return dense.back()(dense.back().t1());
    auto it = std::upper_bound(dense.begin(), dense.end(), r, [](double x, const DenseStep<2>& s) { return x < s.t0; });
    return (*(it - 1))(r);
  }

  PhaseState phase_at(double r) const {
    const Vec<2> z = state_at(r);
    return {r, 1.0 + z[0], z[1]};
  }

  double uprime_from(double r, double v) const {
    if (r <= 0.0) return 0.0;
    const double w = N == 1 ? v : v / std::pow(r, N - 1);
    return phi_pow(w, 1.0 / (p - 1.0));
  }

  double uprime_at(double r) const { return uprime_from(r, state_at(r)[1]); }

  PhaseState phase(const TrajectorySample& s) const { return {s.r, s.u(), s.v}; }
};

namespace detail {

inline double rpow(double r, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= r;
  return out;
}

struct ShootRhs {
  const NonlinearitySpec* spec;
  int N;
  double qm1;  // p' - 1
  void operator()(double r, const Vec<2>& z, Vec<2>& dz) const {
    const double w = N == 1 ? 1.0 : rpow(r, N - 1);
    dz[0] = phi_pow(N == 1 ? z[1] : z[1] / w, qm1);
    dz[1] = -w * eval_fhat_offset(*spec, z[0]);
  }
};

inline double unwrap(double raw, double prev, double period) {
  return raw + period * std::round((prev - raw) / period);
}

inline BallStartup ball_startup(const Problem& pb, double d) {
  BallStartup s;
  s.N = pb.N();
  s.p_prime = pb.p_prime();
  s.e0 = d - 1.0;
  s.fd = eval_fhat_offset(pb.spec, s.e0);
  const double R2 = pb.domain.R2;
  double delta = std::min(1e-6, R2 * 1e-8);
  if (s.fd != 0.0) {
    // radius over which u would move by |d - 1| at the initial rate
    const double shift = std::max(std::fabs(s.e0), 1e-300);
    const double rate = std::pow(std::fabs(s.fd) / s.N, s.p_prime - 1.0) / s.p_prime;
    const double r_core = std::pow(shift / rate, 1.0 / s.p_prime);
    if (std::isfinite(r_core)) delta = std::min(delta, 1e-4 * r_core);
  }
  s.delta0 = delta;
  return s;
}

}  // namespace detail

inline Trajectory integrate_cauchy(const Problem& pb, double d, const ShootOptions& opt = {}) {
  if (!(d >= 0.0) || !std::isfinite(d)) throw DomainError("initial datum d must be finite and >= 0");
  if (!(opt.rtol > 0.0) || !(opt.atol > 0.0)) throw DomainError("tolerances must be positive");
  const RadialDomain& dom = pb.domain;
  Trajectory tr;
  tr.d = d;
  tr.R1 = dom.R1;
  tr.R2 = dom.R2;
  tr.N = dom.N;
  tr.p = pb.p();
  const double r_stop = std::isnan(opt.r_stop) ? dom.R2 : std::clamp(opt.r_stop, dom.R1, dom.R2);
  const double e0 = d - 1.0;
  const double pi_p = pb.pi_p();
  const double period = 2.0 * pi_p;
  const PTrigTable& T = *pb.trig;
  const double p = pb.p();
  tr.theta_start = e0 >= 0.0 ? 0.0 : pi_p;
  tr.r1 = r_stop;

  auto rho_of = [&](double e, double v) { return std::sqrt(PTrigTable::radius_sq(p, e, v)); };

  if (d == 1.0) {
    tr.constant = true;
    tr.theta_defined = false;
    tr.samples.push_back({dom.R1, 0.0, 0.0, 0.0, 0.0});
    tr.samples.push_back({r_stop, 0.0, 0.0, 0.0, 0.0});
    return tr;
  }

  const bool track_r0 = d > 1.0 / pb.spec.eta;
  const double eta_d = pb.spec.eta * d;
  tr.samples.push_back({dom.R1, e0, 0.0, rho_of(e0, 0.0), tr.theta_start});

  double r_init = dom.R1;
  Vec<2> z0{e0, 0.0};
  if (dom.is_ball() && dom.N >= 2) {
    tr.startup = detail::ball_startup(pb, d);
    r_init = tr.startup->delta0;
    z0 = {tr.startup->e_at(r_init), tr.startup->v_at(r_init)};
    double th = opt.track_angle && (z0[0] != 0.0 || z0[1] != 0.0)
                    ? detail::unwrap(T.angle(z0[0], -z0[1]), tr.theta_start, period)
                    : tr.theta_start;
    tr.samples.push_back({r_init, z0[0], z0[1], rho_of(z0[0], z0[1]), th});
  }
  if (r_init >= r_stop) return tr;

  StepControl ctl;
  ctl.rtol = opt.rtol;
  ctl.atol = opt.atol;
  detail::ShootRhs rhs{&pb.spec, dom.N, pb.p_prime() - 1.0};
  auto solver = make_dop853<2>(rhs, ctl);
  solver.set_abs_weight({std::fabs(e0), std::fabs(z0[1])}, true);

  double theta = tr.samples.back().theta;
  bool stop = false;
  auto observer = [&](const DenseStep<2>& ds, const Vec<2>& z1) {
    const double ra = ds.t0, rb = ds.t1();
    const Vec<2> za = ds(ra);
    // events on u = 0 and u = eta d, first crossing only
    if (!tr.u_vanishes && 1.0 + za[0] > 0.0 && 1.0 + z1[0] <= 0.0) {
      tr.r1 = find_root([&](double r) { return 1.0 + ds.component(0, r); }, ra, rb, 1.0 + za[0], 1.0 + z1[0],
                        1e-14 * std::max(1.0, rb));
      tr.u_vanishes = true;
    }
    if (track_r0 && !tr.r0 && za[0] + 1.0 > eta_d && z1[0] + 1.0 <= eta_d) {
      tr.r0 = find_root([&](double r) { return 1.0 + ds.component(0, r) - eta_d; }, ra, rb, 1.0 + za[0] - eta_d,
                        1.0 + z1[0] - eta_d, 1e-14 * std::max(1.0, rb));
    }
    if (opt.track_angle) {
      for (int k = 1; k <= 4; ++k) {
        const Vec<2> zk = ds(ra + (rb - ra) * k / 5.0);
        if (zk[0] != 0.0 || zk[1] != 0.0) theta = detail::unwrap(T.angle(zk[0], -zk[1]), theta, period);
      }
      if (z1[0] != 0.0 || z1[1] != 0.0) theta = detail::unwrap(T.angle(z1[0], -z1[1]), theta, period);
    }
    tr.samples.push_back({rb, z1[0], z1[1], rho_of(z1[0], z1[1]), theta});
    if (opt.keep_dense) tr.dense.push_back(ds);
    if (theta - tr.theta_start > opt.theta_cap) stop = true;
    if (opt.stop_when_v_nonneg) {
      if (z1[1] >= 0.0) stop = true;
      for (int k = 1; k < 8 && !stop; ++k)
        if (ds.component(1, ra + (rb - ra) * k / 8.0) >= 0.0) stop = true;
    }
    return !stop;
  };
  const auto res = solver.integrate(r_init, z0, r_stop, observer);
  tr.steps = res.accepted;
  if (res.stopped && res.t < r_stop) {
    tr.truncated = true;
    if (!tr.u_vanishes) tr.r1 = res.t;
  }
  if (track_r0 && !tr.r0) tr.r0 = tr.r_end();
  return tr;
}

struct EnergySnapshot {
  double r = 0.0;
  double H = 0.0;
};

struct EnergyTrace {
  std::vector<EnergySnapshot> values;
  bool non_increasing = true;
  double max_increase = 0.0;  // largest H(r_{i+1}) - H(r_i)
};

inline double energy(const Problem& pb, double r, double e, double v) {
  const double pp = pb.p_prime();
  double kinetic = 0.0;
  if (r > 0.0) {
    const double w = pb.N() == 1 ? v : v / detail::rpow(r, pb.N() - 1);
    kinetic = std::pow(std::fabs(w), pp) / pp;  // |u'|^p / p'
  }
  return kinetic + eval_Fhat_offset(pb.spec, e);
}

inline EnergyTrace energy_trace(const Problem& pb, const Trajectory& tr, double rel_tol = 1e-7) {
  EnergyTrace out;
  for (const auto& s : tr.samples) out.values.push_back({s.r, tr.constant ? 0.0 : energy(pb, s.r, s.e, s.v)});
  const double H0 = out.values.front().H;
  for (std::size_t i = 1; i < out.values.size(); ++i)
    out.max_increase = std::max(out.max_increase, out.values[i].H - out.values[i - 1].H);
  out.non_increasing = out.max_increase <= rel_tol * (1.0 + H0);
  return out;
}

namespace detail {

// Gauss-Legendre nodes on [-1, 1]
inline const std::array<std::pair<double, double>, 10>& gauss10() {
  static const std::array<std::pair<double, double>, 10> g = {{
      {-0.9739065285171717, 0.0666713443086881}, {-0.8650633666889845, 0.1494513491505806},
      {-0.6794095682990244, 0.2190863625159820}, {-0.4333953941292472, 0.2692667193099963},
      {-0.1488743389816312, 0.2955242247147529}, {0.1488743389816312, 0.2955242247147529},
      {0.4333953941292472, 0.2692667193099963},  {0.6794095682990244, 0.2190863625159820},
      {0.8650633666889845, 0.1494513491505806},  {0.9739065285171717, 0.0666713443086881},
  }};
  return g;
}

// integral over each dense step, split where v or u changes sign
template <class G>
double integrate_along(const Trajectory& tr, G&& g) {
  double total = 0.0;
  for (const auto& ds : tr.dense) {
    std::vector<double> cuts{ds.t0, ds.t1()};
    const Vec<2> a = ds(ds.t0), b = ds(ds.t1());
    for (int comp : {0, 1}) {
      const double shift = comp == 0 ? 1.0 : 0.0;
      const double ga = a[comp] + shift, gb = b[comp] + shift;
      if (ga * gb < 0.0) {
        cuts.push_back(find_root([&](double r) { return ds.component(comp, r) + shift; }, ds.t0, ds.t1(), ga, gb,
                                 1e-15 * std::max(1.0, std::fabs(ds.t1()))));
      }
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double lo = cuts[k], hi = cuts[k + 1];
      if (hi <= lo) continue;
      const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
      for (const auto& [x, w] : gauss10()) {
        const double r = mid + half * x;
        total += w * half * g(r, ds(r));
      }
    }
  }
  return total;
}

}  // namespace detail

// Relative defect of the Pohozaev-type identity
//   [r^N H + a u v]_{R1}^{R2} = int r^{N-1} [(1 - N/p + a)|u'|^p + N Fhat(u) - a fhat(u) u] dr.
inline double pohozaev_residual(const Problem& pb, const Trajectory& tr, double a) {
  if (tr.constant) return 0.0;
  const int N = pb.N();
  const double p = pb.p(), pp = pb.p_prime();
  auto lhs = [&](double r, double e, double v) { return detail::rpow(r, N) * energy(pb, r, e, v) + a * (1.0 + e) * v; };
  auto integrand = [&](double r, const Vec<2>& z) {
    const double w = N == 1 ? z[1] : z[1] / detail::rpow(r, N - 1);
    const double du_p = std::pow(std::fabs(w), pp);
    const double u = 1.0 + z[0];
    return detail::rpow(r, N - 1) * ((1.0 - N / p + a) * du_p + N * eval_Fhat_offset(pb.spec, z[0]) -
                                     a * eval_fhat_offset(pb.spec, z[0]) * u);
  };
  double integral = detail::integrate_along(tr, integrand);
  const auto& first = tr.samples.front();
  const auto& last = tr.samples.back();
  double L0 = lhs(first.r, first.e, first.v);
  if (tr.startup) {
    // on [0, delta0] the state is (d, 0) to leading order
    const double d0 = tr.startup->delta0;
    integral += detail::rpow(d0, N) / N *
                (N * eval_Fhat_offset(pb.spec, tr.startup->e0) - a * tr.startup->fd * tr.d);
    L0 = 0.0;
  }
  const double L1 = lhs(last.r, last.e, last.v);
  return std::fabs(L1 - L0 - integral) / (1.0 + std::fabs(L1));
}

// min{R2, [(1 - eta) d p']^{1/p'} (N / f*(d))^{1/p}}
inline double r0_lower_bound(const RadialDomain& dom, const NonlinearitySpec& spec, double d) {
  if (!(d > 1.0 / spec.eta)) throw DomainError("r0 bound requires d > 1/eta");
  const double p = spec.p, pp = p / (p - 1.0);
  const double fs = eval_fstar(spec, d);
  const double b = std::pow((1.0 - spec.eta) * d * pp, 1.0 / pp) * std::pow(dom.N / fs, 1.0 / p);
  return std::min(dom.R2, b);
}

struct ElasticPoint {
  double d = 0.0;
  double min_u_plus_du = 0.0;  // min over [R1, r1(d)] of u + |u'|
};

inline std::vector<ElasticPoint> elastic_profile(const Problem& pb, const std::vector<double>& d_grid,
                                                 const ShootOptions& opt = {}) {
  std::vector<ElasticPoint> out;
  double prev = 1.0;
  for (double d : d_grid) {
    if (!(d > 1.0) || d <= prev) {
      if (!(d > 1.0)) throw DomainError("elastic profile needs d > 1");
      if (!out.empty()) throw DomainError("elastic profile needs an increasing grid");
    }
    prev = d;
    const Trajectory tr = integrate_cauchy(pb, d, opt);
    double mn = std::numeric_limits<double>::infinity();
    auto consider = [&](double r, const Vec<2>& z) {
      if (r > tr.r1) return;
      mn = std::min(mn, 1.0 + z[0] + std::fabs(tr.uprime_from(r, z[1])));
    };
    for (const auto& s : tr.samples) consider(s.r, {s.e, s.v});
    for (const auto& ds : tr.dense)
      for (int k = 1; k < 8; ++k) {
        const double r = ds.t0 + ds.h * k / 8.0;
        consider(r, ds(r));
      }
    if (tr.u_vanishes) mn = std::min(mn, std::fabs(tr.uprime_at(tr.r1)));
    out.push_back({d, mn});
  }
  return out;
}

struct ElasticDiagnostic {
  double rhs = 0.0;         // K1 f*(d) d r0^N - K2
  double min_lhs = 0.0;     // min over [r0, R2] of the left side
  double margin = 0.0;      // min_lhs - rhs
  double r_at_min = 0.0;
};

// Both sides of
//   R2^N H(r) + (N/p*) R2^{N-1} (|u|^p/p + |u'|^p/p')  >=  K1 f*(d) d r0^N - K2
// on [r0, R2]. N/p* is taken as 0 when p* is infinite.
inline ElasticDiagnostic elastic_lower_bound_diagnostic(const Problem& pb, const Trajectory& tr, double K1,
                                                        double K2) {
  if (!pb.domain.is_ball()) throw DomainError("the lower-bound diagnostic is stated on a ball");
  if (!(tr.d > 1.0 / pb.spec.eta) || !tr.r0) throw DomainError("diagnostic needs d > 1/eta");
  if (K1 < 0 || K2 < 0) throw DomainError("K1, K2 must be nonnegative");
  const int N = pb.N();
  const double p = pb.p(), pp = pb.p_prime();
  const double pstar = pb.spec.exponents().p_star;
  const double Np = std::isfinite(pstar) ? N / pstar : 0.0;
  const double R2 = pb.domain.R2;
  ElasticDiagnostic out;
  out.rhs = K1 * eval_fstar(pb.spec, tr.d) * tr.d * std::pow(*tr.r0, N) - K2;
  out.min_lhs = std::numeric_limits<double>::infinity();
  for (const auto& s : tr.samples) {
    if (s.r < *tr.r0) continue;
    const double du = std::fabs(tr.uprime_from(s.r, s.v));
    const double lhs = std::pow(R2, N) * energy(pb, s.r, s.e, s.v) +
                       Np * std::pow(R2, N - 1) * (std::pow(std::fabs(s.u()), p) / p + std::pow(du, p) / pp);
    if (lhs < out.min_lhs) {
      out.min_lhs = lhs;
      out.r_at_min = s.r;
    }
  }
  out.margin = out.min_lhs - out.rhs;
  return out;
}

struct PolarEnd {
  double rho = 0.0;
  double theta = 0.0;
  double min_rho = 0.0;
};

// Integrates the (rho, theta) form directly; used to cross-check the unwrapped angle.
inline PolarEnd integrate_polar(const Problem& pb, double d, const ShootOptions& opt = {}) {
  if (d == 1.0) throw DomainError("the polar form is singular at the constant solution");
  const RadialDomain& dom = pb.domain;
  const int N = dom.N;
  const double p = pb.p(), pp = pb.p_prime();
  const PTrigTable& T = *pb.trig;
  double r0 = dom.R1;
  double e = d - 1.0, v = 0.0;
  if (dom.is_ball() && N >= 2) {
    const BallStartup s = detail::ball_startup(pb, d);
    r0 = s.delta0;
    e = s.e_at(r0);
    v = s.v_at(r0);
  }
  double theta = d > 1.0 ? 0.0 : pb.pi_p();
  if (r0 > dom.R1) theta = detail::unwrap(T.angle(e, -v), theta, 2.0 * pb.pi_p());
  const double rho = std::sqrt(PTrigTable::radius_sq(p, e, v));
  auto rhs = [&](double r, const Vec<2>& z, Vec<2>& dz) {
    const double rh = z[0];
    const CosSin cs = T.eval(z[1]);
    const double X = std::pow(rh, 2.0 / p) * cs.c;
    const double V = -std::pow(rh, 2.0 / pp) * cs.s;
    const double w = N == 1 ? 1.0 : detail::rpow(r, N - 1);
    const double du = phi_pow(V / w, pp - 1.0);
    const double fh = eval_fhat_offset(pb.spec, X);
    dz[0] = p / (2.0 * rh) * du * (phi_pow(X, p - 1.0) - std::pow(r, (N - 1) * pp) * fh);
    dz[1] = w / (rh * rh) * ((p - 1.0) * std::pow(std::fabs(du), p) + X * fh);
  };
  StepControl ctl;
  ctl.rtol = opt.rtol;
  ctl.atol = opt.atol;
  auto solver = make_dop853<2>(rhs, ctl);
  solver.set_abs_weight({rho, 1.0}, true);
  PolarEnd out;
  out.min_rho = rho;
  const auto res = solver.integrate(r0, Vec<2>{rho, theta}, dom.R2, [&](const DenseStep<2>&, const Vec<2>& z) {
    out.min_rho = std::min(out.min_rho, z[0]);
    return z[0] > 0.0;
  });
  out.rho = res.y[0];
  out.theta = res.y[1];
  return out;
}

}  // namespace plap
