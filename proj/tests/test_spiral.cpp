#include <gtest/gtest.h>

#include <cmath>

#include "plap/spiral.hpp"

using namespace plap;

namespace {

// S/U between M_- and M_+ at sampled radii and phase points
void check_msu(double p, int N, double q, double r, double eps) {
  const NonlinearitySpec spec = NonlinearitySpec::prototype(p, N, q, r);
  const double R2 = 10.0;
  const double pp = p / (p - 1.0);
  const auto T = PTrigTable::shared(p);
  int checked = 0;
  for (int ir = 0; ir <= 8; ++ir) {
    const double rr = eps * R2 + (R2 - eps * R2) * ir / 8.0;
    for (double ell : {0.05, 0.3, 0.9}) {
      for (int j = 0; j < 97; ++j) {
        const double phi = 2.0 * T->pi_p() * j / 97.0;
        const CosSin cs = T->eval(phi);
        const double u = 1.0 + std::pow(ell, 2.0 / p) * cs.c;
        const double w = -std::pow(ell, 2.0 / pp) * cs.s;
        const double ratio = spiral_S(spec, R2, rr, u, w) / spiral_U(spec, R2, rr, u, w);
        const double lo = spiral_M(spec, eps, false, u, w);
        const double hi = spiral_M(spec, eps, true, u, w);
        const double tol = 1e-12 * (1.0 + std::fabs(ratio));
        EXPECT_GE(ratio - lo, -tol) << "r=" << rr << " l=" << ell << " phi=" << phi;
        EXPECT_GE(hi - ratio, -tol) << "r=" << rr << " l=" << ell << " phi=" << phi;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 2000);
}

}  // namespace

TEST(Spiral, RatioBetweenComparisonFunctionsSemilinear) { check_msu(2.0, 3, 4.0, 2.0, 0.1); }

TEST(Spiral, RatioBetweenComparisonFunctionsQuasilinear) {
  check_msu(1.5, 3, 2.5, 2.0, 0.1);
  check_msu(3.0, 2, 4.0, 3.0, 0.3);
}

TEST(Spiral, SemilinearRational) {
  // p = 2: M_+ = phi(w)(e - a f)/( |w|^2 + a f e ) on w e >= 0
  const NonlinearitySpec spec = NonlinearitySpec::prototype(2.0, 3, 4.0, 2.0);
  const double a = 1e-4;  // eps^{(N-1) p'} with eps = 0.1
  const double u = 1.3, w = 0.2, e = u - 1.0;
  const double f = u * u * u - u;
  EXPECT_NEAR(spiral_M(spec, 0.1, true, u, w), w * (e - a * f) / (w * w + a * f * e), 1e-14);
  EXPECT_NEAR(spiral_M(spec, 0.1, false, u, w), w * (e - f) / (w * w + f * e), 1e-14);
}

TEST(Spiral, ZeroCurveStaysZero) {
  const NonlinearitySpec spec = NonlinearitySpec::prototype(1.5, 1, 2.5, 2.0);
  EXPECT_EQ(spiral_M(spec, 0.1, true, 1.0, 0.0), 0.0);
  EXPECT_EQ(spiral_M(spec, 0.1, false, 1.0, 0.0), 0.0);
  SpiralOptions o;
  o.phi_samples = 8;
  double prev = 1.0;
  for (double ell : {1e-4, 1e-8, 1e-12}) {
    const SpiralBounds b = spiral_bounds(spec, 0.1, 1, ell, o);
    EXPECT_LT(b.M, prev);
    EXPECT_GT(b.m, 0.0);
    prev = b.M;
  }
  EXPECT_LT(prev, 1e-8);
}

TEST(Spiral, OneDimensionalCurvesCoincide) {
  const NonlinearitySpec spec = NonlinearitySpec::prototype(1.5, 1, 2.5, 2.0);
  for (double u : {0.6, 0.9, 1.2, 1.7})
    for (double w : {-0.4, -0.01, 0.02, 0.5})
      EXPECT_DOUBLE_EQ(spiral_M(spec, 0.1, true, u, w), spiral_M(spec, 0.1, false, u, w));
}

TEST(Spiral, DeltaStarIsInfimumOfGrid) {
  const NonlinearitySpec spec = NonlinearitySpec::prototype(1.5, 1, 2.5, 2.0);
  const double ds = delta_star(spec, 0.1, 0.2, 0.6, 64);
  EXPECT_GT(ds, 0.0);
  // brute force on a finer grid never goes below by more than rounding
  const auto T = PTrigTable::shared(1.5);
  double mn = 1e300;
  for (int i = 0; i <= 400; ++i)
    for (int j = 0; j < 400; ++j) {
      const double ell = 0.2 + 0.4 * i / 400.0, phi = 2 * T->pi_p() * j / 400.0;
      const CosSin cs = T->eval(phi);
      const double e = std::pow(ell, 2.0 / 1.5) * cs.c;
      const double qv = 0.5 * std::pow(std::fabs(cs.s), 3.0) + eval_fhat_offset(spec, e) * e / (ell * ell);
      mn = std::min(mn, qv);
    }
  EXPECT_LE(ds, mn * (1 + 1e-12));
  EXPECT_GT(ds, 0.9 * mn);
}

TEST(Spiral, OneDimensionalChainAndSandwich) {
  const NonlinearitySpec spec = NonlinearitySpec::prototype(1.5, 1, 2.5, 2.0);
  const SpiralVerification ch = spiral_chain(spec, 1, 0.1);
  ASSERT_TRUE(ch.chain_found);
  EXPECT_LT(0.0, ch.ell_check);
  EXPECT_LT(ch.ell_check, ch.m_k);
  EXPECT_LE(ch.m_k, ch.ell_star);
  EXPECT_LE(ch.ell_star, ch.M_k);
  EXPECT_LT(ch.M_k, ch.ell_hat);
  EXPECT_LT(ch.ell_hat, 1.0);
  ASSERT_TRUE(std::isfinite(ch.R_star));
  EXPECT_NEAR(ch.R_star, ch.k * PTrigTable::shared(1.5)->pi_p() / ((1 - 0.1) * ch.delta_star), 1e-12 * ch.R_star);

  const Problem pb(RadialDomain::ball(std::ceil(1.05 * ch.R_star), 1), spec);
  const SpiralVerification sv = spiral_verify(pb, 1, 0.1);
  ASSERT_TRUE(sv.d_hat.has_value());
  EXPECT_GT(*sv.d_hat, 1.0);
  EXPECT_LT(*sv.d_hat, *sv.d_tilde);
  EXPECT_NEAR(sv.ell_at_eps, sv.ell_star, 1e-9);
  EXPECT_TRUE(sv.sandwich_checked);
  EXPECT_TRUE(sv.sandwich_passed) << sv.sandwich_worst;
  EXPECT_TRUE(sv.final_claim);
  EXPECT_GT(sv.phi_gain, pb.pi_p());
}

TEST(Spiral, N3HasFiniteRadius) {
  const NonlinearitySpec spec = NonlinearitySpec::prototype(1.5, 3, 2.5, 2.0);
  SpiralOptions o;
  o.ell_min = 1e-5;
  o.ell_max = 1e-3;
  o.ell_candidates = 3;
  o.phi_samples = 16;
  const SpiralVerification ch = spiral_chain(spec, 1, 0.1, o);
  ASSERT_TRUE(ch.chain_found);
  EXPECT_TRUE(std::isfinite(ch.R_star));
  EXPECT_GT(ch.R_star, 0.0);
  // regression baseline for these grid settings
  EXPECT_NEAR(ch.R_star, 3.42023e12, 1e-4 * 3.42023e12);
}

TEST(Spiral, RejectsAnnulusTooWide) {
  const NonlinearitySpec spec = NonlinearitySpec::prototype(1.5, 1, 2.5, 2.0);
  const Problem pb(RadialDomain::annulus(2.0, 10.0, 1), spec);
  EXPECT_THROW(spiral_verify(pb, 1, 0.1), DomainError);
}
