#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "plap/errors.hpp"
#include "plap/ptrig.hpp"

namespace plap {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// f(s) = s^{q-1} - s^{r-1}
struct Prototype {
  double q = 4.0;
  double r = 2.0;
};

struct Callable {
  std::function<double(double)> f;
  std::string label = "user";
};

// Sampled (s, f(s)) with monotone piecewise cubic interpolation (Fritsch-Carlson).
class SampledTable {
 public:
  SampledTable() = default;
  SampledTable(std::vector<double> s, std::vector<double> f) : s_(std::move(s)), f_(std::move(f)) {
    if (s_.size() != f_.size() || s_.size() < 2) throw DomainError("table needs at least two (s, f) rows");
    for (std::size_t i = 1; i < s_.size(); ++i)
      if (!(s_[i] > s_[i - 1])) throw DomainError("table abscissae must be strictly increasing");
    slopes();
    cum_.assign(s_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < s_.size(); ++i) cum_[i + 1] = cum_[i] + piece_integral(i, s_[i + 1]);
  }

  static SampledTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open table file " + path);
    std::vector<double> s, f;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      double a, b;
      if (!(ls >> a)) continue;
      if (!(ls >> b)) throw DomainError(path + ":" + std::to_string(lineno) + ": expected two columns");
      std::string extra;
      if (ls >> extra) throw DomainError(path + ":" + std::to_string(lineno) + ": expected two columns");
      s.push_back(a);
      f.push_back(b);
    }
    return SampledTable(std::move(s), std::move(f));
  }

  double s_min() const { return s_.front(); }
  double s_max() const { return s_.back(); }
  const std::vector<double>& abscissae() const { return s_; }
  const std::vector<double>& values() const { return f_; }

  double operator()(double s) const {
    const std::size_t i = cell(s);
    const double h = s_[i + 1] - s_[i], t = (s - s_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f_[i] + (t3 - 2 * t2 + t) * h * d_[i] + (-2 * t3 + 3 * t2) * f_[i + 1] +
           (t3 - t2) * h * d_[i + 1];
  }

  // integral from s_min to s, exact for the interpolant
  double integral(double s) const {
    const std::size_t i = cell(s);
    return cum_[i] + piece_integral(i, s);
  }

 private:
  std::size_t cell(double s) const {
    if (s < s_.front() || s > s_.back()) throw DomainError("s = " + std::to_string(s) + " outside table range");
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t i = static_cast<std::size_t>(it - s_.begin());
    i = i == 0 ? 0 : i - 1;
    return std::min(i, s_.size() - 2);
  }

  double piece_integral(std::size_t i, double s) const {
    const double h = s_[i + 1] - s_[i], t = (s - s_[i]) / h;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    return h * (f_[i] * (t4 / 2 - t3 + t) + h * d_[i] * (t4 / 4 - 2 * t3 / 3 + t2 / 2) + f_[i + 1] * (-t4 / 2 + t3) +
                h * d_[i + 1] * (t4 / 4 - t3 / 3));
  }

  void slopes() {
    const std::size_t n = s_.size();
    std::vector<double> del(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) del[i] = (f_[i + 1] - f_[i]) / (s_[i + 1] - s_[i]);
    d_.assign(n, 0.0);
    if (n == 2) {
      d_[0] = d_[1] = del[0];
      return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (del[i - 1] * del[i] <= 0) continue;
      const double h0 = s_[i] - s_[i - 1], h1 = s_[i + 1] - s_[i];
      const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
      d_[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double d = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (d * d0 <= 0) d = 0;
      else if (d0 * d1 <= 0 && std::fabs(d) > 3 * std::fabs(d0)) d = 3 * d0;
      return d;
    };
    d_[0] = end_slope(s_[1] - s_[0], s_[2] - s_[1], del[0], del[1]);
    d_[n - 1] = end_slope(s_[n - 1] - s_[n - 2], s_[n - 2] - s_[n - 3], del[n - 2], del[n - 3]);
  }

  std::vector<double> s_, f_, d_, cum_;
};

enum class GrowthClass { subl, subc, annulus_unrestricted };

struct NonlinearitySpec {
  std::variant<Prototype, Callable, SampledTable> kind = Prototype{};
  double p = 2.0;
  int N = 3;
  double eta = 0.5;
  GrowthClass growth = GrowthClass::subc;

  static NonlinearitySpec prototype(double p, int N, double q, double r, double eta = 0.5) {
    NonlinearitySpec s;
    s.kind = Prototype{q, r};
    s.p = p;
    s.N = N;
    s.eta = eta;
    return s;
  }
  static NonlinearitySpec user(double p, int N, std::function<double(double)> f, std::string label = "user") {
    NonlinearitySpec s;
    s.kind = Callable{std::move(f), std::move(label)};
    s.p = p;
    s.N = N;
    return s;
  }
  static NonlinearitySpec table(double p, int N, SampledTable t) {
    NonlinearitySpec s;
    s.kind = std::move(t);
    s.p = p;
    s.N = N;
    return s;
  }

  bool is_prototype() const { return std::holds_alternative<Prototype>(kind); }
  const Prototype* proto() const { return std::get_if<Prototype>(&kind); }
  PExponents exponents() const { return PExponents::of(p, N); }

  // Structural checks; for_ball adds the subcriticality of the prototype.
  void validate(bool for_ball) const {
    require_p(p);
    if (N < 1) throw DomainError("N must be >= 1");
    if (!(eta > 0.0 && eta < 1.0)) throw DomainError("eta must lie in (0, 1)");
    if (const Prototype* pr = proto()) {
      if (!(p <= pr->r && pr->r < pr->q))
        throw DomainError("prototype requires p <= r < q (p=" + std::to_string(p) + ", r=" + std::to_string(pr->r) +
                          ", q=" + std::to_string(pr->q) + ")");
      if (for_ball && !(pr->q < exponents().p_star))
        throw DomainError("prototype on a ball requires q < p* = " + std::to_string(exponents().p_star));
    }
  }
};

namespace detail {

// expm1(x) - x, accurate for small x
inline double expm1mx(double x) {
  if (std::fabs(x) < 0.1) {
    double term = x * x / 2, sum = term;
    for (int k = 3; k < 30; ++k) {
      term *= x / k;
      sum += term;
      if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
    }
    return sum;
  }
  return std::expm1(x) - x;
}

inline double proto_f_offset(const Prototype& pr, double e) {
  if (e <= -1.0) return 0.0;
  if (std::fabs(e) < 0.5) {
    const double L = std::log1p(e);
    return std::expm1((pr.q - 1.0) * L) - std::expm1((pr.r - 1.0) * L);
  }
  const double s = 1.0 + e;
  return std::pow(s, pr.q - 1.0) - std::pow(s, pr.r - 1.0);
}

inline double proto_F_offset(const Prototype& pr, double e) {
  if (e <= -1.0) return 1.0 / pr.r - 1.0 / pr.q;
  if (std::fabs(e) < 0.5) {
    const double L = std::log1p(e);
    // (s^q - 1)/q - (s^r - 1)/r with the linear parts cancelled exactly
    return expm1mx(pr.q * L) / pr.q - expm1mx(pr.r * L) / pr.r;
  }
  const double s = 1.0 + e;
  return std::pow(s, pr.q) / pr.q - std::pow(s, pr.r) / pr.r - (1.0 / pr.q - 1.0 / pr.r);
}

inline double quad(const std::function<double(double)>& g, double a, double b) {
  if (a == b) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, a, b, 15, 1e-13, &err);
}

}  // namespace detail

// f on [0, inf); DomainError for s < 0.
inline double eval_f(const NonlinearitySpec& spec, double s) {
  if (!(s >= 0.0)) throw DomainError("f is only defined for s >= 0 (use eval_fhat)");
  return std::visit(
      [s](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Prototype>) {
          return std::pow(s, k.q - 1.0) - std::pow(s, k.r - 1.0);
        } else if constexpr (std::is_same_v<K, Callable>) {
          return k.f(s);
        } else {
          return k(s);
        }
      },
      spec.kind);
}

inline double eval_fhat(const NonlinearitySpec& spec, double s) { return s < 0.0 ? 0.0 : eval_f(spec, s); }

// f^(1 + e), accurate when e is tiny.
inline double eval_fhat_offset(const NonlinearitySpec& spec, double e) {
  if (const Prototype* pr = spec.proto()) return detail::proto_f_offset(*pr, e);
  return eval_fhat(spec, 1.0 + e);
}

// F(s) = int_1^s f, s >= 0
inline double eval_F(const NonlinearitySpec& spec, double s) {
  if (!(s >= 0.0)) throw DomainError("F is only defined for s >= 0 (use eval_Fhat)");
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Prototype>) {
          return detail::proto_F_offset(k, s - 1.0);
        } else if constexpr (std::is_same_v<K, Callable>) {
          return detail::quad(k.f, 1.0, s);
        } else {
          return k.integral(s) - k.integral(1.0);
        }
      },
      spec.kind);
}

inline double eval_Fhat(const NonlinearitySpec& spec, double s) { return eval_F(spec, std::max(s, 0.0)); }

inline double eval_Fhat_offset(const NonlinearitySpec& spec, double e) {
  if (const Prototype* pr = spec.proto()) return detail::proto_F_offset(*pr, e);
  return eval_Fhat(spec, 1.0 + e);
}

// max of f over [1, s]
inline double eval_fstar(const NonlinearitySpec& spec, double s) {
  if (!(s >= 1.0)) throw DomainError("f* is only defined for s >= 1");
  if (s == 1.0) return 0.0;
  if (spec.is_prototype()) return eval_f(spec, s);  // increasing on [1, inf) when q > r
  constexpr int M = 4096;
  const double ls = std::log(s);
  double best = 0.0;
  int arg = 0;
  std::vector<double> grid(M + 1);
  for (int i = 0; i <= M; ++i) {
    grid[i] = i == M ? s : std::exp(ls * i / M);
    const double v = eval_f(spec, grid[i]);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  // golden-section refinement around the grid maximiser
  double a = grid[std::max(arg - 1, 0)], b = grid[std::min(arg + 1, M)];
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = eval_f(spec, x1), f2 = eval_f(spec, x2);
  for (int it = 0; it < 80 && b - a > 1e-14 * b; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = eval_f(spec, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = eval_f(spec, x1);
    }
  }
  return std::max({best, f1, f2, eval_f(spec, s)});
}

// lim F(s) as s -> inf, estimated on a geometric grid up to s_max
inline double eval_Finfinity(const NonlinearitySpec& spec, double s_max = 1e6) {
  if (const Prototype* pr = spec.proto()) return pr->q > pr->r ? kInf : 1.0 / pr->r - 1.0 / pr->q;
  if (const SampledTable* t = std::get_if<SampledTable>(&spec.kind)) s_max = std::min(s_max, t->s_max());
  const double a = eval_F(spec, s_max / 10.0), b = eval_F(spec, s_max);
  if (!std::isfinite(b) || b > 1e12) return kInf;
  if (std::fabs(b - a) > 1e-6 * (1.0 + std::fabs(b))) return kInf;
  return b;
}

// C1 = lim_{s -> 1} f(s) / phi_p(s - 1), from both sides with Aitken acceleration.
inline double compute_c1(const NonlinearitySpec& spec, double tol = 1e-10) {
  require_p(spec.p);
  const double big = std::max(1.0 / tol, 1e10);
  auto side = [&](double sign) -> double {
    std::vector<double> g;
    double h = 0.1;
    for (int k = 0; k < 48; ++k, h *= 0.5) {
      if (sign < 0 && h >= 1.0) continue;
      const double e = sign * h;
      const double val = eval_fhat_offset(spec, e) / phi_pow(e, spec.p - 1.0);
      g.push_back(val);
      const std::size_t n = g.size();
      if (std::fabs(val) > big && n >= 2 && std::fabs(val) > std::fabs(g[n - 2])) return std::copysign(kInf, val);
      if (n >= 3) {
        const double d1 = g[n - 1] - g[n - 2], d2 = g[n - 1] - 2 * g[n - 2] + g[n - 3];
        const double acc = std::fabs(d2) > 0 ? g[n - 1] - d1 * d1 / d2 : g[n - 1];
        if (n >= 6 && std::fabs(d1) < tol * (1.0 + std::fabs(acc))) return acc;
      }
    }
    const std::size_t n = g.size();
    const double d1 = g[n - 1] - g[n - 2], d2 = g[n - 1] - 2 * g[n - 2] + g[n - 3];
    return std::fabs(d2) > 0 ? g[n - 1] - d1 * d1 / d2 : g[n - 1];
  };
  const double right = side(1.0), left = side(-1.0);
  if (std::isinf(right) || std::isinf(left)) {
    if (right == left) return right;
    throw InconclusiveError("one-sided limits of f(s)/phi_p(s-1) at s=1 disagree");
  }
  const double lim = 0.5 * (right + left);
  if (std::fabs(right - left) > std::max(1e-6, 1e3 * tol) * (1.0 + std::fabs(lim)))
    throw InconclusiveError("one-sided limits of f(s)/phi_p(s-1) at s=1 disagree: " + std::to_string(left) + " vs " +
                            std::to_string(right));
  return std::fabs(lim) < 1e-9 ? 0.0 : lim;
}

enum class Status { verified_on_grid, violated, inconclusive };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::verified_on_grid: return "verified-on-grid";
    case Status::violated: return "violated";
    default: return "inconclusive";
  }
}

struct HypothesisStatus {
  Status status = Status::inconclusive;
  std::optional<double> witness;  // required when violated
  double value = 0.0;             // the probed quantity at the tail, if any
  std::string note;
};

struct SubcritFit {
  double epsilon = 0.0;
  double C_eps = 0.0;
  double s_eps = 0.0;
};

struct HypothesisReport {
  HypothesisStatus reg, eq, zero, subl, subc;
  double eta = 0.5;  // the eta used (or found) for the subc quotient
  double M = 0.0;    // tail bound of f(s)/s^{p-1} when subl holds
  std::optional<SubcritFit> fit;
};

struct ProbeGrid {
  double s_min = 1e-8;
  double s_max = 1e6;
  int points = 2401;

  std::vector<double> build() const {
    std::vector<double> g;
    const double a = std::log(s_min), b = std::log(s_max);
    for (int i = 0; i < points; ++i) g.push_back(std::exp(a + (b - a) * i / (points - 1)));
    // dense around 1 from both sides
    for (int k = 1; k <= 60; ++k) {
      const double h = std::pow(10.0, -k / 10.0);
      g.push_back(1.0 - h);
      g.push_back(1.0 + h);
    }
    g.push_back(1.0);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
  }
};

namespace detail {

// max over the last decade of the grid of f*(s) s / F(eta s)
inline double subc_tail(const NonlinearitySpec& spec, const std::vector<double>& tail, double eta, double& witness) {
  double worst = -kInf;
  for (double s : tail) {
    const double Fe = eval_F(spec, eta * s);
    const double q = Fe > 0 ? eval_fstar(spec, s) * s / Fe : kInf;
    if (q > worst) {
      worst = q;
      witness = s;
    }
  }
  return worst;
}

}  // namespace detail

inline HypothesisReport check_hypotheses(const NonlinearitySpec& spec, const ProbeGrid& probe = {},
                                         bool search_eta = true) {
  HypothesisReport rep;
  rep.eta = spec.eta;
  double s_max = probe.s_max;
  if (const SampledTable* t = std::get_if<SampledTable>(&spec.kind)) s_max = std::min(s_max, t->s_max());
  ProbeGrid pg = probe;
  pg.s_max = s_max;
  const std::vector<double> grid = pg.build();
  const double p = spec.p;

  // (reg): finite values and finite difference quotients on the grid
  rep.reg.status = Status::verified_on_grid;
  for (double s : grid) {
    const double v = eval_f(spec, s);
    const double h = 1e-6 * s;
    const double dq = (eval_f(spec, s + h) - eval_f(spec, std::max(s - h, 0.0))) / (s + h - std::max(s - h, 0.0));
    if (!std::isfinite(v) || !std::isfinite(dq)) {
      rep.reg = {Status::violated, s, v, "non-finite value or difference quotient"};
      break;
    }
  }
  if (!std::isfinite(eval_f(spec, 0.0))) rep.reg = {Status::violated, 0.0, 0.0, "f(0) not finite"};

  // (eq)
  rep.eq.status = Status::verified_on_grid;
  const double f0 = eval_f(spec, 0.0), f1 = eval_f(spec, 1.0);
  if (std::fabs(f0) > 1e-12) rep.eq = {Status::violated, 0.0, f0, "f(0) != 0"};
  else if (std::fabs(f1) > 1e-12) rep.eq = {Status::violated, 1.0, f1, "f(1) != 0"};
  else {
    for (double s : grid) {
      if (s <= 0.0 || s == 1.0 || s > s_max) continue;
      const double v = eval_f(spec, s);
      if ((s < 1.0 && !(v < 0.0)) || (s > 1.0 && !(v > 0.0))) {
        rep.eq = {Status::violated, s, v, s < 1.0 ? "f >= 0 inside (0,1)" : "f <= 0 beyond 1"};
        break;
      }
    }
  }

  // (f_0): liminf f(s)/s^{p-1} at 0+. Bounded below on the small-s grid, and not
  // running away in the smallest decade.
  {
    std::vector<double> qs, ss;
    for (double s : grid)
      if (s < 1e-2) {
        qs.push_back(eval_f(spec, s) / std::pow(s, p - 1.0));
        ss.push_back(s);
      }
    if (qs.size() < 8) {
      rep.zero = {Status::inconclusive, std::nullopt, 0.0, "grid does not reach 0+"};
    } else {
      const auto it = std::min_element(qs.begin(), qs.end());
      const double mn = *it;
      const std::size_t n = qs.size();
      const std::size_t dec = std::max<std::size_t>(n / 6, 3);
      bool monotone_down = true;
      for (std::size_t i = 1; i < dec; ++i)
        if (!(qs[i] < qs[i - 1])) monotone_down = false;
      rep.zero.value = mn;
      if (mn < -1e8 && monotone_down && qs[0] < 2 * qs[dec]) {
        rep.zero = {Status::violated, ss[static_cast<std::size_t>(it - qs.begin())], mn, "quotient unbounded below"};
      } else if (!std::isfinite(mn)) {
        rep.zero = {Status::violated, ss[static_cast<std::size_t>(it - qs.begin())], mn, "non-finite quotient"};
      } else {
        double osc = 0.0;
        for (std::size_t i = 1; i < dec; ++i) osc = std::max(osc, std::fabs(qs[i] - qs[i - 1]));
        if (osc > 1e6) rep.zero = {Status::inconclusive, std::nullopt, mn, "oscillatory near 0"};
        else rep.zero.status = Status::verified_on_grid;
      }
    }
  }

  // tail: last decade of the probe grid
  std::vector<double> tail;
  for (double s : grid)
    if (s >= s_max / 10.0 && s > 1.0) tail.push_back(s);

  // (subl)
  {
    std::vector<double> qs;
    for (double s : tail) qs.push_back(eval_f(spec, s) / std::pow(s, p - 1.0));
    const double mx = *std::max_element(qs.begin(), qs.end());
    const double first = qs.front(), last = qs.back();
    const bool growing = last > 1.5 * std::max(first, 1e-300) && last > 0;
    rep.subl.value = mx;
    if (!growing && std::isfinite(mx) && mx < 1e12) {
      rep.subl.status = Status::verified_on_grid;
      rep.M = std::max(mx, 0.0);
      if (rep.M == 0.0) rep.M = std::numeric_limits<double>::min();
    } else {
      rep.subl = {Status::violated, tail.back(), mx, "f(s)/s^{p-1} grows along the tail"};
    }
  }

  // (subc)
  {
    const double pstar = spec.exponents().p_star;
    if (rep.subl.status == Status::verified_on_grid) {
      rep.subc = {Status::violated, tail.back(), rep.subl.value, "f(s)/s^{p-1} stays bounded"};
    } else {
      double witness = tail.back();
      double eta = spec.eta;
      double val = detail::subc_tail(spec, tail, eta, witness);
      if (search_eta) {
        double a = 0.01, b = 0.99;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double w1, w2;
        double x1 = b - g * (b - a), x2 = a + g * (b - a);
        double f1 = detail::subc_tail(spec, tail, x1, w1), f2 = detail::subc_tail(spec, tail, x2, w2);
        for (int it = 0; it < 40; ++it) {
          if (f1 > f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = detail::subc_tail(spec, tail, x2, w2);
          } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = detail::subc_tail(spec, tail, x1, w1);
          }
        }
        for (double cand : {x1, x2, 0.99}) {
          double w;
          const double v = detail::subc_tail(spec, tail, cand, w);
          if (v < val) {
            val = v;
            eta = cand;
            witness = w;
          }
        }
      }
      rep.eta = eta;
      rep.subc.value = val;
      if (val < pstar) rep.subc.status = Status::verified_on_grid;
      else rep.subc = {Status::violated, witness, val, "tail quotient f*(s)s/F(eta s) reaches p*"};
    }

    if (rep.subc.status == Status::verified_on_grid && std::isfinite(pstar)) {
      // f(s) s / F(s) <= p* - eps beyond s_eps
      double L = -kInf;
      for (double s : tail) L = std::max(L, eval_f(spec, s) * s / eval_F(spec, s));
      SubcritFit fit;
      fit.epsilon = 0.5 * (pstar - L);
      if (fit.epsilon > 0) {
        const double bound = pstar - fit.epsilon;
        std::size_t start = grid.size();
        for (std::size_t i = grid.size(); i-- > 0;) {
          const double s = grid[i];
          if (s <= 1.0) break;
          const double F = eval_F(spec, s);
          if (!(F > 0) || eval_f(spec, s) * s / F > bound) break;
          start = i;
        }
        if (start < grid.size()) {
          fit.s_eps = grid[start];
          fit.C_eps = bound * eval_F(spec, fit.s_eps) / std::pow(fit.s_eps, bound);
          rep.fit = fit;
        }
      }
    }
  }
  return rep;
}

}  // namespace plap
