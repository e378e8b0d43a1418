#pragma once

// p-trigonometric functions: (cos_p, sin_p) = (x, y) solves
//   x' = -phi_{p'}(y),  y' = phi_p(x),  x(0) = 1, y(0) = 0,
// and stays on the curve |x|^p + (p-1)|y|^{p'} = 1. The half period is pi_p.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "plap/errors.hpp"
#include "plap/ode.hpp"

namespace plap {

inline void require_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("exponent p must satisfy 1 < p < inf, got " + std::to_string(p));
}

// phi_p(s) = |s|^{p-2} s, continuous at 0.
inline double phi_p(double p, double s) {
  require_p(p);
  if (s == 0.0) return 0.0;
  if (p == 2.0) return s;
  return std::copysign(std::pow(std::fabs(s), p - 1.0), s);
}

// Unchecked variant for inner loops.
inline double phi_pow(double s, double pm1) {
  if (s == 0.0) return 0.0;
  if (pm1 == 1.0) return s;
  return std::copysign(std::pow(std::fabs(s), pm1), s);
}

struct PExponents {
  double p = 2.0;
  double p_prime = 2.0;  // conjugate, 1/p + 1/p' = 1
  double p_star = std::numeric_limits<double>::infinity();  // Np/(N-p) if p < N

  bool subcritical_bounded() const { return std::isfinite(p_star); }

  static PExponents of(double p, int N) {
    require_p(p);
    if (N < 1) throw DomainError("dimension N must be >= 1");
    PExponents e;
    e.p = p;
    e.p_prime = p / (p - 1.0);
    e.p_star = p < N ? N * p / (N - p) : std::numeric_limits<double>::infinity();
    return e;
  }
};

namespace detail {

struct TrigRhs {
  double pm1, qm1;  // p - 1, p' - 1
  void operator()(double, const Vec<2>& z, Vec<2>& dz) const {
    dz[0] = -phi_pow(z[1], qm1);
    dz[1] = phi_pow(z[0], pm1);
  }
};

inline StepControl trig_control(double tol) {
  StepControl c;
  c.rtol = std::clamp(tol * 1e-2, 2e-15, 1e-8);
  c.atol = c.rtol;
  return c;
}

}  // namespace detail

// Half period from the defining system: first crossing of y through 0 with
// x < 0. Cross-checked against twice the first zero of x.
inline double compute_pi_p(double p, double tol = 1e-12) {
  require_p(p);
  const double pp = p / (p - 1.0);
  detail::TrigRhs rhs{p - 1.0, pp - 1.0};
  auto solver = make_dop853<2>(rhs, detail::trig_control(tol));
  double half = -1.0, quarter = -1.0;
  const double xtol = std::max(tol * 1e-3, 1e-16);
  solver.integrate(0.0, Vec<2>{1.0, 0.0}, 64.0, [&](const DenseStep<2>& ds, const Vec<2>& y1) {
    const Vec<2> y0 = ds(ds.t0);
    if (quarter < 0 && y0[0] > 0 && y1[0] <= 0) {
      quarter = find_root([&](double t) { return ds.component(0, t); }, ds.t0, ds.t1(), y0[0], y1[0], xtol);
    }
    if (quarter >= 0 && y0[0] < 0 && y0[1] > 0 && y1[1] <= 0) {
      half = find_root([&](double t) { return ds.component(1, t); }, ds.t0, ds.t1(), y0[1], y1[1], xtol);
      return false;
    }
    return true;
  });
  if (half < 0) throw NumericError("half period not reached");
  if (std::fabs(half - 2.0 * quarter) > std::max(1e-9, 1e3 * tol) * half) {
    throw ConsistencyError("half period and quarter period disagree for p = " + std::to_string(p));
  }
  return half;
}

struct CosSin {
  double c;
  double s;
};

// Piecewise cubic Hermite table of (cos_p, sin_p) on [0, pi_p/2]. In each
// cell the coordinate that is small there is interpolated and the other one
// recovered from the curve identity; the rest of the period follows from
// cos_p(pi_p - t) = -cos_p(t), sin_p(pi_p - t) = sin_p(t) and the shift by pi_p.
class PTrigTable {
 public:
  explicit PTrigTable(double p, std::size_t cells = std::size_t{1} << 15, double tol = 1e-13)
      : p_(p), pp_(p / (p - 1.0)), cells_(cells) {
    require_p(p);
    if (cells < 16) throw DomainError("table needs at least 16 cells");
    pi_p_ = compute_pi_p(p, tol);
    quarter_ = 0.5 * pi_p_;
    h_ = quarter_ / static_cast<double>(cells_);
    x_.assign(cells_ + 1, 0.0);
    y_.assign(cells_ + 1, 0.0);
    std::size_t next = 0;
    detail::TrigRhs rhs{p - 1.0, pp_ - 1.0};
    auto solver = make_dop853<2>(rhs, detail::trig_control(tol));
    solver.integrate(0.0, Vec<2>{1.0, 0.0}, quarter_, [&](const DenseStep<2>& ds, const Vec<2>&) {
      while (next <= cells_ && node(next) <= ds.t1() + 1e-15) {
        const double t = std::min(node(next), ds.t1());
        x_[next] = ds.component(0, t);
        y_[next] = ds.component(1, t);
        ++next;
      }
      return true;
    });
    x_[0] = 1.0;
    y_[0] = 0.0;
    x_[cells_] = 0.0;
    y_[cells_] = std::pow(1.0 / (p - 1.0), 1.0 / pp_);
    big_x_.resize(cells_);
    for (std::size_t i = 0; i < cells_; ++i) big_x_[i] = std::pow(std::fabs(x_[i]), p) >= 0.5;
    for (std::size_t i = 1; i < cells_; ++i) {
      // project nodes onto the curve
      if (big_x_[i]) x_[i] = from_y(y_[i]);
      else y_[i] = from_x(x_[i]);
    }
  }

  double p() const { return p_; }
  double p_prime() const { return pp_; }
  double pi_p() const { return pi_p_; }

  CosSin eval(double phi) const {
    const double period = 2.0 * pi_p_;
    double t = phi - period * std::floor(phi / period);
    if (t >= period) t -= period;
    double sx = 1.0, sy = 1.0;
    if (t > pi_p_) {
      t -= pi_p_;
      sx = -1.0;
      sy = -1.0;
    }
    if (t > quarter_) {
      t = pi_p_ - t;
      sx = -sx;
    }
    const CosSin q = first_quadrant(t);
    return {sx * q.c, sy * q.s};
  }

  double cos_p(double phi) const { return eval(phi).c; }
  double sin_p(double phi) const { return eval(phi).s; }

  // Angle theta in [0, 2 pi_p) of a nonzero point with
  // X = rho^{2/p} cos_p(theta), Y = rho^{2/p'} sin_p(theta).
  double angle(double X, double Y) const {
    const double rho2 = std::pow(std::fabs(X), p_) + (p_ - 1.0) * std::pow(std::fabs(Y), pp_);
    if (!(rho2 > 0.0)) throw DomainError("angle of the origin is undefined");
    const double c = std::fabs(X) / std::pow(rho2, 1.0 / p_);
    const double s = std::fabs(Y) / std::pow(rho2, 1.0 / pp_);
    const double t1 = first_quadrant_angle(c, s);
    if (X >= 0 && Y >= 0) return t1;
    if (X < 0 && Y >= 0) return pi_p_ - t1;
    if (X < 0) return pi_p_ + t1;
    const double t = 2.0 * pi_p_ - t1;
    return t >= 2.0 * pi_p_ ? 0.0 : t;
  }

  static double radius_sq(double p, double X, double Y) {
    const double pp = p / (p - 1.0);
    return std::pow(std::fabs(X), p) + (p - 1.0) * std::pow(std::fabs(Y), pp);
  }

  // Shared instance per exponent.
  static std::shared_ptr<const PTrigTable> shared(double p) {
    static std::mutex mu;
    static std::map<double, std::shared_ptr<const PTrigTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(p);
    if (it != cache.end()) return it->second;
    auto t = std::make_shared<const PTrigTable>(p);
    cache.emplace(p, t);
    return t;
  }

 private:
  double node(std::size_t i) const { return i == cells_ ? quarter_ : h_ * static_cast<double>(i); }

  double from_y(double y) const {
    const double r = 1.0 - (p_ - 1.0) * std::pow(std::fabs(y), pp_);
    return r <= 0.0 ? 0.0 : std::pow(r, 1.0 / p_);
  }
  double from_x(double x) const {
    const double r = (1.0 - std::pow(std::fabs(x), p_)) / (p_ - 1.0);
    return r <= 0.0 ? 0.0 : std::pow(r, 1.0 / pp_);
  }

  static double hermite(double t, double h, double f0, double f1, double d0, double d1) {
    const double s = t / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * f0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * f1 + (s3 - s2) * h * d1;
  }

  // t in [0, pi_p/2]
  CosSin first_quadrant(double t) const {
    std::size_t i = static_cast<std::size_t>(t / h_);
    if (i >= cells_) i = cells_ - 1;
    const double tl = t - node(i);
    const double hc = node(i + 1) - node(i);
    if (big_x_[i]) {
      const double y = hermite(tl, hc, y_[i], y_[i + 1], phi_pow(x_[i], p_ - 1.0), phi_pow(x_[i + 1], p_ - 1.0));
      return {from_y(y), std::max(y, 0.0)};
    }
    const double x = hermite(tl, hc, x_[i], x_[i + 1], -phi_pow(y_[i], pp_ - 1.0), -phi_pow(y_[i + 1], pp_ - 1.0));
    return {std::max(x, 0.0), from_x(x)};
  }

  // c, s >= 0 on the curve; theta in [0, pi_p/2]
  double first_quadrant_angle(double c, double s) const {
    const bool use_y = std::pow(c, p_) >= 0.5;
    std::size_t lo = 0, hi = cells_;
    // y_ increasing, x_ decreasing over the nodes
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      const bool below = use_y ? (y_[mid] <= s) : (x_[mid] >= c);
      if (below) lo = mid;
      else hi = mid;
    }
    double a = node(lo), b = node(hi);
    auto g = [&](double t) {
      const CosSin q = first_quadrant(t);
      return use_y ? q.s - s : c - q.c;
    };
    double ga = g(a), gb = g(b);
    if (ga >= 0) return a;
    if (gb <= 0) return b;
    double t = a + (b - a) * (-ga) / (gb - ga);
    for (int it = 0; it < 40; ++it) {
      const CosSin q = first_quadrant(t);
      const double gt = use_y ? q.s - s : c - q.c;
      if (gt == 0.0) return t;
      if (gt < 0) a = t;
      else b = t;
      const double dg = use_y ? phi_pow(q.c, p_ - 1.0) : phi_pow(q.s, pp_ - 1.0);
      double tn = dg > 0 ? t - gt / dg : 0.5 * (a + b);
      if (!(tn > a && tn < b)) tn = 0.5 * (a + b);
      if (std::fabs(tn - t) <= 4e-16 * (1.0 + t)) return tn;
      t = tn;
    }
    return t;
  }

  double p_, pp_;
  std::size_t cells_;
  double pi_p_ = 0.0, quarter_ = 0.0, h_ = 0.0;
  std::vector<double> x_, y_;
  std::vector<char> big_x_;
};

inline CosSin cos_sin_p(double p, double phi) { return PTrigTable::shared(p)->eval(phi); }

}  // namespace plap
