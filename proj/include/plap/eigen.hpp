#pragma once

// Radial Neumann eigenvalues of -(r^{N-1} phi_p(u'))' = lambda r^{N-1} phi_p(u)
// through the decoupled Pruefer angle
//   theta' = (p-1) r^{(N-1)(1-p')} |sin_p theta|^{p'} + lambda r^{N-1} |cos_p theta|^p.

#include <cmath>
#include <utility>
#include <vector>

#include "plap/errors.hpp"
#include "plap/ode.hpp"
#include "plap/ptrig.hpp"
#include "plap/shooter.hpp"

namespace plap {

struct EigenResult {
  int k = 1;
  double lambda = 0.0;
  std::vector<std::pair<double, double>> angle_trace;  // (r, theta)
  int zero_count = 0;
};

struct EigenOptions {
  double tol = 1e-10;       // relative tolerance on lambda
  double angle_tol = 1e-8;  // residual on theta(R2) - (k-1) pi_p
  double ode_tol = 1e-13;
};

namespace detail {

inline double eigen_start(const RadialDomain& dom) {
  return dom.is_ball() && dom.N >= 2 ? std::min(1e-6, dom.R2 * 1e-8) : dom.R1;
}

}  // namespace detail

inline double pruefer_angle_at_R2(const RadialDomain& dom, double p, double lambda, double tol = 1e-12,
                                  std::vector<std::pair<double, double>>* trace = nullptr) {
  require_p(p);
  dom.validate();
  if (!(lambda >= 0.0)) throw DomainError("eigenvalue parameter must be >= 0");
  if (lambda == 0.0) {
    if (trace) *trace = {{dom.R1, 0.0}, {dom.R2, 0.0}};
    return 0.0;
  }
  const PTrigTable& T = *PTrigTable::shared(p);
  const int N = dom.N;
  const double pp = p / (p - 1.0);
  const double expo = (N - 1) * (1.0 - pp);
  auto rhs = [&](double r, const Vec<1>& z, Vec<1>& dz) {
    const CosSin cs = T.eval(z[0]);
    const double w = detail::rpow(r, N - 1);
    const double a = N == 1 ? 1.0 : std::pow(r, expo);
    dz[0] = (p - 1.0) * a * std::pow(std::fabs(cs.s), pp) + lambda * w * std::pow(std::fabs(cs.c), p);
  };
  const double r0 = detail::eigen_start(dom);
  const double th0 = r0 > dom.R1 ? lambda * detail::rpow(r0, N) / N : 0.0;
  StepControl ctl;
  ctl.rtol = std::max(tol, 1e-14);
  ctl.atol = ctl.rtol;
  ctl.dense = false;
  auto solver = make_dop853<1>(rhs, ctl);
  if (trace) {
    trace->clear();
    trace->push_back({dom.R1, 0.0});
    if (r0 > dom.R1) trace->push_back({r0, th0});
  }
  const auto res = solver.integrate(r0, Vec<1>{th0}, dom.R2, [&](const DenseStep<1>& ds, const Vec<1>& z) {
    if (trace) trace->push_back({ds.t1(), z[0]});
    return true;
  });
  return res.y[0];
}

struct Eigenfunction {
  std::vector<std::array<double, 3>> samples;  // r, u, v
  int sign_changes = 0;
};

// u(R1) = 1, v(R1) = 0 integrated in Cartesian form at the given lambda.
inline Eigenfunction eigenfunction(const RadialDomain& dom, double p, double lambda, double tol = 1e-12) {
  require_p(p);
  const int N = dom.N;
  const double pp = p / (p - 1.0);
  auto rhs = [&](double r, const Vec<2>& z, Vec<2>& dz) {
    const double w = N == 1 ? 1.0 : detail::rpow(r, N - 1);
    dz[0] = phi_pow(z[1] / w, pp - 1.0);
    dz[1] = -lambda * w * phi_pow(z[0], p - 1.0);
  };
  const double r0 = detail::eigen_start(dom);
  Vec<2> z0{1.0, 0.0};
  if (r0 > dom.R1) {
    z0[0] = 1.0 - std::pow(r0, pp) / pp * std::pow(lambda / N, pp - 1.0);
    z0[1] = -lambda * detail::rpow(r0, N) / N;
  }
  Eigenfunction out;
  out.samples.push_back({dom.R1, 1.0, 0.0});
  if (r0 > dom.R1) out.samples.push_back({r0, z0[0], z0[1]});
  StepControl ctl;
  ctl.rtol = std::max(tol, 1e-14);
  ctl.atol = ctl.rtol;
  auto solver = make_dop853<2>(rhs, ctl);
  double prev = 1.0;
  auto count = [&](double u) {
    if (u != 0.0) {
      if ((u > 0) != (prev > 0)) ++out.sign_changes;
      prev = u;
    }
  };
  solver.integrate(r0, z0, dom.R2, [&](const DenseStep<2>& ds, const Vec<2>& z) {
    for (int k = 1; k < 8; ++k) count(ds.component(0, ds.t0 + ds.h * k / 8.0));
    count(z[0]);
    out.samples.push_back({ds.t1(), z[0], z[1]});
    return true;
  });
  return out;
}

inline EigenResult find_eigenvalue(const RadialDomain& dom, double p, int k, const EigenOptions& opt = {}) {
  require_p(p);
  dom.validate();
  if (k < 1) throw DomainError("eigenvalue index k must be >= 1");
  EigenResult res;
  res.k = k;
  if (k == 1) {
    res.lambda = 0.0;
    res.angle_trace = {{dom.R1, 0.0}, {dom.R2, 0.0}};
    res.zero_count = 0;
    return res;
  }
  const double target = (k - 1) * PTrigTable::shared(p)->pi_p();
  auto g = [&](double lam) { return pruefer_angle_at_R2(dom, p, lam, opt.ode_tol) - target; };
  double lo = 0.0, hi = 1.0;
  double glo = -target, ghi = g(hi);
  while (ghi < 0.0) {
    lo = hi;
    glo = ghi;
    hi *= 2.0;
    if (hi > 1e12) throw NotFoundError("eigenvalue bracket exceeded 1e12");
    ghi = g(hi);
  }
  if (!(glo < 0.0)) throw ConsistencyError("angle not monotone in lambda on the bracket");
  // Illinois iteration with the double stopping rule
  double lam = hi, glam = ghi;
  int side = 0;
  for (int it = 0; it < 400; ++it) {
    if (hi - lo <= opt.tol * std::max(1.0, lam) && std::fabs(glam) <= opt.angle_tol) break;
    double c = (lo * ghi - hi * glo) / (ghi - glo);
    if (!(c > lo && c < hi) || it % 8 == 7) c = 0.5 * (lo + hi);
    const double gc = g(c);
    lam = c;
    glam = gc;
    if (gc == 0.0) {
      lo = hi = c;
      break;
    }
    if (gc > 0) {
      hi = c;
      ghi = gc;
      if (side == -1) glo *= 0.5;
      side = -1;
    } else {
      lo = c;
      glo = gc;
      if (side == 1) ghi *= 0.5;
      side = 1;
    }
  }
  res.lambda = lam;
  pruefer_angle_at_R2(dom, p, lam, opt.ode_tol, &res.angle_trace);
  res.zero_count = eigenfunction(dom, p, lam, opt.ode_tol).sign_changes;
  return res;
}

}  // namespace plap
