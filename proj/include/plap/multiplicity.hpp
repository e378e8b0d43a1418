#pragma once

// Threshold d*, angle scans over d, bracketing and refinement of shots with
// theta_d(R2) - theta_d(R1) = j pi_p, and the C^1 bound.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "plap/errors.hpp"
#include "plap/nonlinearity.hpp"
#include "plap/parallel.hpp"
#include "plap/shooter.hpp"

namespace plap {

enum class Side { above, below };
enum class Branch { plus, minus, unique };

inline const char* to_string(Side s) { return s == Side::above ? "above" : "below"; }
inline const char* to_string(Branch b) {
  switch (b) {
    case Branch::plus: return "plus";
    case Branch::minus: return "minus";
    default: return "unique";
  }
}

struct Bracket {
  double d_lo = 0.0;
  double d_hi = 0.0;
  int j = 0;  // straddles theta_start + j pi_p
};

struct ScanReport {
  std::vector<double> d_grid;       // sorted
  std::vector<double> theta_at_R2;  // absolute final angle (capped shots report the angle at the cap)
  std::vector<double> turns;        // theta(R2) - theta(R1)
  double d_star = std::numeric_limits<double>::quiet_NaN();
  std::vector<Bracket> brackets;
  std::optional<double> d_hat;        // in (1, d*), turns > k pi_p
  std::optional<double> d_hat_below;  // mirrored datum in (0, 1)
  double cap = std::numeric_limits<double>::infinity();
};

struct SolutionRecord {
  double d = 1.0;
  int j = 0;
  Side side = Side::above;
  Branch branch = Branch::unique;
  std::vector<std::array<double, 3>> profile;  // r, u, u'
  double residual = 0.0;                       // |v(R2)|
  double v_max = 0.0;
  std::vector<double> zero_radii;
  int angle_crossings = 0;
  double u_min = 0.0, u_max = 0.0, du_max = 0.0;
  double turns = 0.0;
};

struct SolveOptions {
  int k = 1;  // targets j = 1..k
  int grid = 512;  // points per side
  int refine_factor = 4;
  int refine_rounds = 3;
  double near_one = 1e-6;   // closest |d - 1| on the grids
  double near_zero = 1e-6;  // smallest d below 1
  double scan_rtol = 1e-10;
  double rtol = 1e-12;  // refinement and final shots
  double angle_tol = 1e-10;
  double d_star_tol = 1e-6;
  double d_max = 1e6;
  bool above = true;
  bool below = true;
  bool locate_d_hat = true;
};

struct SolveResult {
  ScanReport scan;
  std::vector<SolutionRecord> records;
  double bound = 0.0;  // a priori C^1 constant
  std::vector<std::string> warnings;
};

namespace detail {

inline ShootOptions quick_options(double rtol) {
  ShootOptions o;
  o.rtol = rtol;
  o.atol = rtol * 1e-2;
  o.keep_dense = false;
  return o;
}

inline bool decreasing_on_domain(const Problem& pb, double d, double rtol) {
  ShootOptions o = quick_options(rtol);
  o.track_angle = false;
  o.stop_when_v_nonneg = true;
  const Trajectory tr = integrate_cauchy(pb, d, o);
  return !tr.truncated && tr.samples.back().v < 0.0;
}

}  // namespace detail

// turns = theta_d(R2) - theta_d(R1); stops early past cap.
inline double final_turns(const Problem& pb, double d, double cap, double rtol) {
  if (d == 1.0) return 0.0;
  ShootOptions o = detail::quick_options(rtol);
  o.theta_cap = cap;
  return integrate_cauchy(pb, d, o).delta_theta();
}

// Smallest d with u_d' < 0 on (R1, R2] for every grid datum at or above it.
// A geometric grid in d - 1 is walked down from d_max; the first failure is refined by
// bisection, and the persistence window [d, 4d] is re-sampled at the end.
inline double estimate_d_star(const Problem& pb, double tol = 1e-6, double d_max = 1e6, double rtol = 1e-10) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  if (!detail::decreasing_on_domain(pb, d_max, rtol)) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "no threshold d* below d_max = %g (u' returns to 0; f may violate the growth hypotheses)",
                  d_max);
    throw NotFoundError(msg);
  }
  // geometric in d - 1, down to 1e-6
  const double ratio = std::pow(2.0, 0.125);
  double hi = d_max, lo = 1.0;
  bool failed = false;
  for (double x = (d_max - 1.0) / ratio; x > 1e-6; x /= ratio) {
    if (!detail::decreasing_on_domain(pb, 1.0 + x, rtol)) {
      lo = 1.0 + x;
      failed = true;
      break;
    }
    hi = 1.0 + x;
  }
  if (!failed) return hi;
  auto window_ok = [&](double d) {
    if (!detail::decreasing_on_domain(pb, d, rtol)) return false;
    for (int i = 1; i <= 8; ++i)
      if (!detail::decreasing_on_domain(pb, d * std::pow(4.0, i / 8.0), rtol)) return false;
    return true;
  };
  while (hi - lo > tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (detail::decreasing_on_domain(pb, mid, rtol)) hi = mid;
    else lo = mid;
  }
  // the grid above hi passed; confirm the window at the refined value
  while (!window_ok(hi)) {
    hi *= 1.0 + tol;
    if (hi > d_max) throw NotFoundError("persistence window check failed up to d_max");
  }
  return hi;
}

// Log-spaced in d - 1 on (1, d_top]; logit-spaced on (0, 1).
inline std::vector<double> grid_above(double d_top, int n, double near_one) {
  std::vector<double> g;
  if (!(d_top > 1.0 + near_one)) return g;
  const double a = std::log(near_one), b = std::log(d_top - 1.0);
  for (int i = 0; i < n; ++i) g.push_back(1.0 + std::exp(a + (b - a) * i / (n - 1)));
  g.back() = d_top;
  return g;
}

inline std::vector<double> grid_below(int n, double near_zero, double near_one) {
  std::vector<double> g;
  const double a = std::log(near_zero / (1.0 - near_zero));
  const double b = std::log((1.0 - near_one) / near_one);
  for (int i = 0; i < n; ++i) {
    const double x = a + (b - a) * i / (n - 1);
    g.push_back(1.0 / (1.0 + std::exp(-x)));
  }
  return g;
}

namespace detail {

inline void collect_brackets(const std::vector<double>& d, const std::vector<double>& turns, double pi_p, int k,
                             std::vector<Bracket>& out) {
  for (std::size_t i = 0; i + 1 < d.size(); ++i) {
    if ((d[i] < 1.0) != (d[i + 1] < 1.0)) continue;
    for (int j = 1; j <= k; ++j) {
      const double t = j * pi_p;
      if ((turns[i] > t) != (turns[i + 1] > t)) out.push_back({d[i], d[i + 1], j});
    }
  }
}

// golden-section maximum of the turns on [a, b]
template <class G>
double golden_max(G&& g, double a, double b, double rel) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double g1 = g(x1), g2 = g(x2);
  for (int it = 0; it < 200 && b - a > rel * std::fabs(b); ++it) {
    if (g1 >= g2) {
      b = x2;
      x2 = x1;
      g2 = g1;
      x1 = b - phi * (b - a);
      g1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      g1 = g2;
      x2 = a + phi * (b - a);
      g2 = g(x2);
    }
  }
  return g1 >= g2 ? x1 : x2;
}

}  // namespace detail

// Final angles on d_grid (both sides allowed), brackets for j = 1..k; when
// k_hat > 0, the argmax of the turns on each side is refined and kept if it
// exceeds k_hat pi_p.
inline ScanReport scan_theta(const Problem& pb, std::vector<double> d_grid, int k, double d_star,
                             double rtol = 1e-10, int k_hat = 0) {
  std::sort(d_grid.begin(), d_grid.end());
  d_grid.erase(std::unique(d_grid.begin(), d_grid.end()), d_grid.end());
  d_grid.erase(std::remove(d_grid.begin(), d_grid.end(), 1.0), d_grid.end());
  for (double d : d_grid)
    if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("scan grid must lie in (0, 1) u (1, inf)");
  const double pi_p = pb.pi_p();
  ScanReport rep;
  rep.d_star = d_star;
  rep.cap = (std::max(k, k_hat) + 1) * pi_p;
  rep.d_grid = d_grid;
  rep.turns = parallel_map<double>(d_grid.size(), [&](std::size_t i) { return final_turns(pb, d_grid[i], rep.cap, rtol); });
  for (std::size_t i = 0; i < d_grid.size(); ++i)
    rep.theta_at_R2.push_back(rep.turns[i] + (d_grid[i] < 1.0 ? pi_p : 0.0));
  detail::collect_brackets(rep.d_grid, rep.turns, pi_p, k, rep.brackets);
  if (k_hat > 0) {
    for (int side = 0; side < 2; ++side) {
      std::size_t best = d_grid.size();
      for (std::size_t i = 0; i < d_grid.size(); ++i) {
        const bool in = side == 0 ? (d_grid[i] > 1.0 && (std::isnan(d_star) || d_grid[i] < d_star)) : d_grid[i] < 1.0;
        if (in && (best == d_grid.size() || rep.turns[i] > rep.turns[best])) best = i;
      }
      if (best == d_grid.size() || !(rep.turns[best] > k_hat * pi_p)) continue;
      double dh = d_grid[best];
      if (rep.turns[best] < rep.cap && best > 0 && best + 1 < d_grid.size()) {
        const double a = d_grid[best - 1], b = d_grid[best + 1];
        if ((a < 1.0) == (b < 1.0)) {
          const double x = detail::golden_max([&](double d) { return final_turns(pb, d, rep.cap, rtol); }, a, b, 1e-10);
          if (final_turns(pb, x, rep.cap, rtol) >= rep.turns[best]) dh = x;
        }
      }
      if (side == 0) rep.d_hat = dh;
      else rep.d_hat_below = dh;
    }
  }
  return rep;
}

// C = d* + (p' max{Fhat(0), Fhat(d*)})^{1/p} (1 + R2 - R1)
inline double a_priori_bound(const Problem& pb, double d_star) {
  if (!(d_star > 1.0)) throw DomainError("a priori bound needs d* > 1");
  const double pp = pb.p_prime();
  const double m = std::max(eval_Fhat(pb.spec, 0.0), eval_Fhat(pb.spec, d_star));
  return d_star + std::pow(pp * m, 1.0 / pb.p()) * (1.0 + pb.domain.R2 - pb.domain.R1);
}

// Sign changes of u - 1 on (R1, R2), probed at 8 points per step.
inline std::vector<double> sign_change_radii(const Trajectory& tr) {
  std::vector<double> out;
  if (tr.constant) return out;
  double prev_r = tr.samples.front().r, prev_e = tr.samples.front().e;
  auto visit = [&](const DenseStep<2>* ds, double r, double e) {
    if (e == 0.0) return;
    if ((e > 0.0) != (prev_e > 0.0)) {
      double root = 0.5 * (prev_r + r);
      if (ds && prev_r >= ds->t0) {
        root = find_root([&](double x) { return ds->component(0, x); }, prev_r, r, prev_e, e, 1e-15 * std::max(1.0, r));
      }
      out.push_back(root);
    }
    prev_r = r;
    prev_e = e;
  };
  if (tr.startup && tr.samples.size() > 1) visit(nullptr, tr.samples[1].r, tr.samples[1].e);
  for (const auto& ds : tr.dense)
    for (int k = 1; k <= 8; ++k) {
      const double r = k == 8 ? ds.t1() : ds.t0 + ds.h * k / 8.0;
      visit(&ds, r, ds.component(0, r));
    }
  return out;
}

// Crossings of theta through (i - 1/2) pi_p between theta(R1) and theta(R2).
inline int angle_crossings(const Trajectory& tr, double pi_p) {
  if (tr.constant) return 0;
  auto idx = [&](double th) { return static_cast<int>(std::floor(th / pi_p + 0.5)); };
  return idx(tr.theta_end()) - idx(tr.theta_start);
}

inline int count_zeros(const SolutionRecord& rec) {
  const int n = static_cast<int>(rec.zero_radii.size());
  if (n != rec.angle_crossings)
    throw ConsistencyError("zero count " + std::to_string(n) + " disagrees with angle crossings " +
                           std::to_string(rec.angle_crossings));
  return n;
}

inline SolutionRecord make_record(const Problem& pb, double d, int j, double rtol) {
  ShootOptions o;
  o.rtol = rtol;
  o.atol = rtol * 1e-2;
  const Trajectory tr = integrate_cauchy(pb, d, o);
  SolutionRecord rec;
  rec.d = d;
  rec.j = j;
  rec.side = d > 1.0 ? Side::above : Side::below;
  rec.turns = tr.delta_theta();
  rec.residual = std::fabs(tr.samples.back().v);
  rec.u_min = rec.u_max = d;
  auto consider = [&](double r, double e, double v) {
    const double u = 1.0 + e;
    rec.u_min = std::min(rec.u_min, u);
    rec.u_max = std::max(rec.u_max, u);
    rec.v_max = std::max(rec.v_max, std::fabs(v));
    rec.du_max = std::max(rec.du_max, std::fabs(tr.uprime_from(r, v)));
  };
  for (const auto& s : tr.samples) {
    consider(s.r, s.e, s.v);
    rec.profile.push_back({s.r, s.u(), tr.uprime_from(s.r, s.v)});
  }
  for (const auto& ds : tr.dense)
    for (int k = 1; k < 8; ++k) {
      const double r = ds.t0 + ds.h * k / 8.0;
      const Vec<2> z = ds(r);
      consider(r, z[0], z[1]);
    }
  rec.zero_radii = sign_change_radii(tr);
  rec.angle_crossings = angle_crossings(tr, pb.pi_p());
  return rec;
}

namespace detail {

// Illinois iteration on the turns; returns nullopt if the bracket is lost.
inline std::optional<double> refine_bracket(const Problem& pb, Bracket b, double cap, const SolveOptions& opt) {
  const double target = b.j * pb.pi_p();
  auto g = [&](double d) { return final_turns(pb, d, cap, opt.rtol) - target; };
  double lo = b.d_lo, hi = b.d_hi;
  double glo = g(lo), ghi = g(hi);
  if ((glo > 0.0) == (ghi > 0.0)) return std::nullopt;
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  int side = 0;
  double x = lo, gx = glo;
  for (int it = 0; it < 300; ++it) {
    double c = (lo * ghi - hi * glo) / (ghi - glo);
    if (!(c > lo && c < hi) || it % 6 == 5) c = 0.5 * (lo + hi);
    if (c <= lo || c >= hi) break;
    const double gc = g(c);
    x = c;
    gx = gc;
    if (std::fabs(gc) <= opt.angle_tol) return c;
    if ((gc > 0.0) == (ghi > 0.0)) {
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
  // bracket collapsed to adjacent doubles
  if (std::fabs(gx) <= 1e3 * opt.angle_tol) return x;
  return std::nullopt;
}

inline void assign_branches(std::vector<SolutionRecord>& recs) {
  for (Side s : {Side::above, Side::below}) {
    for (int j = 1;; ++j) {
      std::vector<SolutionRecord*> g;
      bool any_higher = false;
      for (auto& r : recs) {
        if (r.side != s) continue;
        if (r.j == j) g.push_back(&r);
        if (r.j > j) any_higher = true;
      }
      if (g.size() >= 2) {
        std::sort(g.begin(), g.end(),
                  [](const SolutionRecord* a, const SolutionRecord* b) { return std::fabs(a->d - 1.0) < std::fabs(b->d - 1.0); });
        for (auto* r : g) r->branch = Branch::unique;
        g.front()->branch = Branch::minus;
        g.back()->branch = Branch::plus;
      } else if (g.size() == 1) {
        g.front()->branch = Branch::unique;
      }
      if (g.empty() && !any_higher) break;
    }
  }
}

}  // namespace detail

inline SolveResult find_solutions(const Problem& pb, const SolveOptions& opt = {}) {
  if (opt.k < 1) throw DomainError("k must be >= 1");
  if (opt.grid < 8) throw DomainError("scan grid too small");
  SolveResult out;
  if (pb.supercritical) out.warnings.push_back("nonlinearity is not subcritical on the ball; results are best-effort");
  double d_star = std::numeric_limits<double>::quiet_NaN();
  if (opt.above) d_star = estimate_d_star(pb, opt.d_star_tol, opt.d_max, opt.scan_rtol);
  std::vector<double> grid;
  if (opt.above) {
    // past d* the turns stay below pi_p; the margin keeps the outermost j = 1 crossing inside the grid
    const auto a = grid_above(2.0 * d_star, opt.grid, opt.near_one);
    grid.insert(grid.end(), a.begin(), a.end());
  }
  if (opt.below) {
    const auto b = grid_below(opt.grid, opt.near_zero, opt.near_one);
    grid.insert(grid.end(), b.begin(), b.end());
  }
  out.scan = scan_theta(pb, grid, opt.k, d_star, opt.scan_rtol, opt.locate_d_hat ? opt.k : 0);
  if (opt.above) out.bound = a_priori_bound(pb, d_star);

  std::vector<Bracket> pending = out.scan.brackets;
  std::vector<double> roots;
  std::vector<int> js;
  for (int round = 0; !pending.empty(); ++round) {
    std::vector<Bracket> lost;
    const auto found = parallel_map<std::optional<double>>(
        pending.size(), [&](std::size_t i) { return detail::refine_bracket(pb, pending[i], out.scan.cap, opt); });
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (found[i]) {
        roots.push_back(*found[i]);
        js.push_back(pending[i].j);
      } else {
        lost.push_back(pending[i]);
      }
    }
    if (lost.empty()) break;
    if (round >= opt.refine_rounds)
      throw NotFoundError("bracket lost after " + std::to_string(opt.refine_rounds) + " refinement rounds");
    // rescan each lost bracket on a finer grid
    pending.clear();
    for (const Bracket& b : lost) {
      const int n = opt.refine_factor * 8;
      std::vector<double> sub;
      for (int i = 0; i <= n; ++i) sub.push_back(b.d_lo + (b.d_hi - b.d_lo) * i / n);
      std::vector<double> t = parallel_map<double>(
          sub.size(), [&](std::size_t i) { return final_turns(pb, sub[i], out.scan.cap, opt.rtol); });
      std::vector<Bracket> nb;
      detail::collect_brackets(sub, t, pb.pi_p(), opt.k, nb);
      for (const Bracket& x : nb)
        if (x.j == b.j) pending.push_back(x);
    }
  }
  // finite records, ordered by d
  std::vector<std::size_t> order(roots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return roots[a] < roots[b]; });
  out.records = parallel_map<SolutionRecord>(
      order.size(), [&](std::size_t i) { return make_record(pb, roots[order[i]], js[order[i]], opt.rtol); });
  for (auto& r : out.records) {
    if (count_zeros(r) != r.j)
      throw ConsistencyError("record at d = " + std::to_string(r.d) + " has " + std::to_string(r.zero_radii.size()) +
                             " zeros, expected " + std::to_string(r.j));
  }
  detail::assign_branches(out.records);
  return out;
}

// |v(R2)| <= 1e-8 (1 + max |v|)
inline bool neumann_ok(const SolutionRecord& r, double tol = 1e-8) { return r.residual <= tol * (1.0 + r.v_max); }

}  // namespace plap
