#pragma once

// Independent reference computations used only by the tests.

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/numeric/odeint.hpp>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

// pi_p / 2 = (p-1)^{-1/p'} int_0^1 (1 - t^{p'})^{-1/p'} dt
inline double pi_p_quadrature(double p) {
  const double pp = p / (p - 1.0);
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [pp](double t, double tc) {
    const double one_minus = t > 0.5 ? -std::expm1(pp * std::log1p(-tc)) : 1.0 - std::pow(t, pp);
    return std::pow(one_minus, -1.0 / pp);
  };
  return 2.0 * std::pow(p - 1.0, -1.0 / pp) * ts.integrate(f, 0.0, 1.0);
}

inline double pi_p_closed_form(double p) {
  return 2.0 * std::numbers::pi * std::pow(p - 1.0, 1.0 / p) / (p * std::sin(std::numbers::pi / p));
}

// Eigenvalues of the radial Neumann Laplacian (p = 2) on the ball of radius R in
// dimension N: cell-centred finite volumes with n cells and exact cell volumes,
// symmetrised and solved by Sturm-sequence bisection. Returns lambda_1..lambda_kmax.
inline std::vector<double> ball_neumann_fd(int N, double R, int n, int kmax) {
  const double h = R / n;
  std::vector<double> vol(n), face(n + 1), diag(n), off(n > 0 ? n - 1 : 0);
  for (int i = 0; i <= n; ++i) face[i] = std::pow(i * h, N - 1);
  face[0] = 0.0;
  face[n] = 0.0;  // Neumann: no flux through the outer face
  for (int i = 0; i < n; ++i) vol[i] = (std::pow((i + 1) * h, N) - std::pow(i * h, N)) / N;
  for (int i = 0; i < n; ++i) diag[i] = (face[i] + face[i + 1]) / h / vol[i];
  for (int i = 0; i + 1 < n; ++i) off[i] = -face[i + 1] / h / std::sqrt(vol[i] * vol[i + 1]);
  // number of eigenvalues below x
  auto count_below = [&](double x) {
    int c = 0;
    double q = diag[0] - x;
    if (q < 0) ++c;
    for (int i = 1; i < n; ++i) {
      if (q == 0.0) q = 1e-300;
      q = diag[i] - x - off[i - 1] * off[i - 1] / q;
      if (q < 0) ++c;
    }
    return c;
  };
  double upper = 0.0;
  for (int i = 0; i < n; ++i)
    upper = std::max(upper, diag[i] + (i > 0 ? std::fabs(off[i - 1]) : 0) + (i + 1 < n ? std::fabs(off[i]) : 0));
  std::vector<double> out;
  for (int k = 1; k <= kmax; ++k) {
    double lo = -1.0, hi = upper;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (count_below(mid) >= k) hi = mid;
      else lo = mid;
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

// positive roots of tan t = t (the radial Neumann condition for N = 3, p = 2)
inline std::vector<double> tan_roots(int count) {
  std::vector<double> out;
  for (int m = 1; m <= count; ++m) {
    double lo = m * std::numbers::pi + 1e-12, hi = (m + 0.5) * std::numbers::pi - 1e-12;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (std::tan(mid) - mid < 0) lo = mid;
      else hi = mid;
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

// Plain (u, v) shot on a ball for the prototype f(s) = s^{q-1} - s^{r-1}
// (zero for s < 0), with odeint's Dormand-Prince 5(4) stepper. Sign changes of
// u - 1 are counted on the observer grid.
struct ProtoShot {
  double v_end = 0.0;
  int sign_changes = 0;
  double u_min = 0.0, u_max = 0.0;
};

inline ProtoShot proto_shot(double p, int N, double q, double r, double R2, double d, double tol = 1e-12) {
  using State = std::array<double, 2>;
  const double pp = p / (p - 1.0);
  auto f = [&](double s) { return s <= 0.0 ? 0.0 : std::pow(s, q - 1.0) - std::pow(s, r - 1.0); };
  auto sgnpow = [](double x, double a) { return x == 0.0 ? 0.0 : std::copysign(std::pow(std::fabs(x), a), x); };
  auto rhs = [&](const State& z, State& dz, double t) {
    const double w = N == 1 ? 1.0 : std::pow(t, N - 1);
    dz[0] = sgnpow(z[1] / w, pp - 1.0);
    dz[1] = -w * f(z[0]);
  };
  double t0 = 0.0;
  State z{d, 0.0};
  if (N >= 2) {
    t0 = 1e-7;
    const double fd = f(d);
    z[0] = d - std::pow(t0, pp) / pp * sgnpow(fd / N, pp - 1.0);
    z[1] = -std::pow(t0, N) * fd / N;
  }
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_dense_output(tol, tol, ode::runge_kutta_dopri5<State>());
  ProtoShot out;
  out.u_min = out.u_max = d;
  double prev = d - 1.0;
  const int n = 20000;
  std::vector<double> times;
  for (int i = 0; i <= n; ++i) times.push_back(t0 + (R2 - t0) * i / n);
  ode::integrate_times(stepper, rhs, z, times.begin(), times.end(), 1e-6 * (R2 - t0), [&](const State& s, double) {
    out.u_min = std::min(out.u_min, s[0]);
    out.u_max = std::max(out.u_max, s[0]);
    const double e = s[0] - 1.0;
    if (e != 0.0) {
      if ((e > 0) != (prev > 0)) ++out.sign_changes;
      prev = e;
    }
  });
  out.v_end = z[1];
  return out;
}

// root of v(R2) by bisection on [lo, hi]
inline double proto_root(double p, int N, double q, double r, double R2, double lo, double hi) {
  double vlo = proto_shot(p, N, q, r, R2, lo).v_end;
  for (int it = 0; it < 60 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double vm = proto_shot(p, N, q, r, R2, mid).v_end;
    if ((vm > 0) == (vlo > 0)) {
      lo = mid;
      vlo = vm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
