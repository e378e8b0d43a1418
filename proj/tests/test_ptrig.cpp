#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "plap/ptrig.hpp"

using namespace plap;

namespace {

// pi_p / 2 = (p-1)^{-1/p'} * int_0^1 (1 - t^{p'})^{-1/p'} dt
double quadrature_pi_p(double p) {
  const double pp = p / (p - 1.0);
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [pp](double t, double tc) {
    // 1 - t^{p'} evaluated from the complement near t = 1
    const double one_minus = t > 0.5 ? -std::expm1(pp * std::log1p(-tc)) : 1.0 - std::pow(t, pp);
    return std::pow(one_minus, -1.0 / pp);
  };
  const double I = ts.integrate(f, 0.0, 1.0);
  return 2.0 * std::pow(p - 1.0, -1.0 / pp) * I;
}

double closed_form_pi_p(double p) {
  return 2.0 * std::numbers::pi * std::pow(p - 1.0, 1.0 / p) / (p * std::sin(std::numbers::pi / p));
}

}  // namespace

TEST(PhiP, OddAndHomogeneous) {
  for (double p : {1.3, 2.0, 3.7}) {
    for (double s : {0.0, 0.25, 1.0, 7.5}) {
      EXPECT_DOUBLE_EQ(phi_p(p, -s), -phi_p(p, s));
      EXPECT_NEAR(phi_p(p, s), std::pow(s, p - 1.0), 1e-15 * (1 + s));
    }
  }
  EXPECT_THROW(phi_p(1.0, 0.5), DomainError);
  EXPECT_THROW(phi_p(0.5, 0.5), DomainError);
}

TEST(PExponents, ConjugateAndCritical) {
  const auto e = PExponents::of(1.5, 3);
  EXPECT_DOUBLE_EQ(e.p_prime, 3.0);
  EXPECT_DOUBLE_EQ(e.p_star, 3.0);
  EXPECT_TRUE(std::isinf(PExponents::of(3.0, 3).p_star));
  EXPECT_TRUE(std::isinf(PExponents::of(2.0, 1).p_star));
}

TEST(PiP, AgreesWithQuadratureAndClosedForm) {
  for (double p : {1.2, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0}) {
    const double pi = compute_pi_p(p, 1e-12);
    EXPECT_NEAR(pi, quadrature_pi_p(p), 1e-11) << "p=" << p;
    EXPECT_NEAR(pi, closed_form_pi_p(p), 1e-11) << "p=" << p;
  }
  EXPECT_NEAR(compute_pi_p(2.0), std::numbers::pi, 1e-12);
}

class TableTest : public ::testing::TestWithParam<double> {};

TEST_P(TableTest, IdentityAndSymmetries) {
  const double p = GetParam();
  const PTrigTable& T = *PTrigTable::shared(p);
  const double pp = p / (p - 1.0);
  const double pi = T.pi_p();
  for (int i = 0; i <= 1000; ++i) {
    const double t = -3.0 * pi + 8.0 * pi * i / 1000.0;
    const CosSin z = T.eval(t);
    EXPECT_NEAR(std::pow(std::fabs(z.c), p) + (p - 1.0) * std::pow(std::fabs(z.s), pp), 1.0, 1e-12);
    const CosSin m = T.eval(pi - t);
    EXPECT_NEAR(m.c, -z.c, 1e-12);
    EXPECT_NEAR(m.s, z.s, 1e-12);
    const CosSin sh = T.eval(t + pi);
    EXPECT_NEAR(sh.c, -z.c, 1e-12);
    EXPECT_NEAR(sh.s, -z.s, 1e-12);
  }
  EXPECT_NEAR(T.cos_p(0.0), 1.0, 1e-15);
  EXPECT_NEAR(T.sin_p(0.0), 0.0, 1e-15);
  EXPECT_NEAR(T.cos_p(pi), -1.0, 1e-12);
  EXPECT_NEAR(T.cos_p(0.5 * pi), 0.0, 1e-12);
}

TEST_P(TableTest, DerivativesMatchSystem) {
  const double p = GetParam();
  const PTrigTable& T = *PTrigTable::shared(p);
  const double pp = p / (p - 1.0);
  const double h = 1e-5;
  for (int i = 1; i < 200; ++i) {
    const double t = 2.0 * T.pi_p() * i / 200.0 + 1e-3;
    const CosSin a = T.eval(t - h), b = T.eval(t + h), z = T.eval(t);
    const double dc = (b.c - a.c) / (2 * h), ds = (b.s - a.s) / (2 * h);
    EXPECT_NEAR(dc, -phi_p(pp, z.s), 1e-6);
    EXPECT_NEAR(ds, phi_p(p, z.c), 1e-6);
  }
}

TEST_P(TableTest, AngleInvertsEvaluation) {
  const double p = GetParam();
  const PTrigTable& T = *PTrigTable::shared(p);
  const double pp = p / (p - 1.0);
  for (int i = 0; i < 997; ++i) {
    const double t = 2.0 * T.pi_p() * i / 997.0;
    const CosSin z = T.eval(t);
    for (double rho : {1e-6, 0.3, 5.0}) {
      const double X = std::pow(rho, 2.0 / p) * z.c, Y = std::pow(rho, 2.0 / pp) * z.s;
      double a = T.angle(X, Y);
      double diff = std::remainder(a - t, 2.0 * T.pi_p());
      EXPECT_NEAR(diff, 0.0, 1e-11) << "t=" << t << " rho=" << rho;
    }
  }
  EXPECT_THROW(T.angle(0.0, 0.0), DomainError);
}

TEST_P(TableTest, SignPattern) {
  const double p = GetParam();
  const PTrigTable& T = *PTrigTable::shared(p);
  const double q = 0.5 * T.pi_p();
  for (int k = 0; k < 4; ++k) {
    const CosSin z = T.eval(q * k + 0.5 * q);
    const int sc = (k == 0 || k == 3) ? 1 : -1;
    const int ss = k < 2 ? 1 : -1;
    EXPECT_EQ(z.c > 0 ? 1 : -1, sc);
    EXPECT_EQ(z.s > 0 ? 1 : -1, ss);
  }
}

INSTANTIATE_TEST_SUITE_P(Exponents, TableTest, ::testing::Values(1.3, 1.5, 2.0, 3.0, 4.0));
