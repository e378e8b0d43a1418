#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "plap/nonlinearity.hpp"

using namespace plap;

namespace {

NonlinearitySpec proto(double p, int N, double q, double r) { return NonlinearitySpec::prototype(p, N, q, r); }

// hump with its maximum at s = 2
double hump(double s) { return (s - 1.0) * std::exp(-0.5 * (s - 1.0) * (s - 1.0)); }

}  // namespace

TEST(EvalF, PrototypeValues) {
  const auto spec = proto(2.0, 3, 4.0, 2.0);
  EXPECT_DOUBLE_EQ(eval_f(spec, 2.0), 6.0);
  EXPECT_DOUBLE_EQ(eval_f(spec, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(eval_f(spec, 0.0), 0.0);
  EXPECT_THROW(eval_f(spec, -0.1), DomainError);
  EXPECT_EQ(eval_fhat(spec, -0.1), 0.0);
}

TEST(EvalF, OffsetFormsMatchDirect) {
  const auto spec = proto(1.5, 3, 2.5, 1.5);
  for (double e : {-0.9, -0.4, -1e-3, 1e-3, 0.3, 2.0}) {
    EXPECT_NEAR(eval_fhat_offset(spec, e), eval_fhat(spec, 1.0 + e), 1e-13);
    EXPECT_NEAR(eval_Fhat_offset(spec, e), eval_Fhat(spec, 1.0 + e), 1e-13);
  }
  // relative accuracy very close to 1: F ~ (q - r) e^2 / 2
  const double e = 1e-9;
  EXPECT_NEAR(eval_Fhat_offset(spec, e) / (0.5 * e * e), 1.0, 1e-6);
  EXPECT_NEAR(eval_fhat_offset(spec, e) / e, 1.0, 1e-6);
}

TEST(EvalF, ClosedFormPrimitiveMatchesQuadrature) {
  for (auto [q, r] : {std::pair{4.0, 2.0}, std::pair{2.5, 1.5}, std::pair{5.0, 3.0}}) {
    const auto spec = proto(1.5, 3, q, r);
    for (double s : {0.0, 0.2, 0.9, 1.0, 1.7, 10.0, 250.0}) {
      auto f = [&](double t) { return std::pow(t, q - 1) - std::pow(t, r - 1); };
      const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 1.0, s, 20, 1e-14);
      EXPECT_NEAR(eval_F(spec, s), I, 1e-8 * (1 + std::fabs(I)));
    }
  }
}

TEST(EvalF, HatPrimitiveShape) {
  const auto spec = proto(2.0, 3, 4.0, 2.0);
  EXPECT_EQ(eval_Fhat(spec, 1.0), 0.0);
  double prev = eval_Fhat(spec, 0.0);
  EXPECT_DOUBLE_EQ(eval_Fhat(spec, -3.0), prev);
  for (int i = 1; i <= 1000; ++i) {
    const double s = 3.0 * i / 1000.0;
    const double F = eval_Fhat(spec, s);
    EXPECT_GE(F, -1e-10);
    if (s < 1.0) {
      EXPECT_LT(F, prev);
    } else if (s > 1.0) {
      EXPECT_GT(F, prev);
    }
    prev = F;
  }
}

TEST(EvalF, UserCallableAndTable) {
  auto spec = NonlinearitySpec::user(2.0, 3, [](double s) { return s * s * s - s; });
  const auto ref = proto(2.0, 3, 4.0, 2.0);
  for (double s : {0.0, 0.5, 2.0, 7.0}) EXPECT_NEAR(eval_F(spec, s), eval_F(ref, s), 1e-10 * (1 + s * s * s * s));

  std::vector<double> ss, ff;
  for (int i = 0; i <= 4000; ++i) {
    const double s = 10.0 * i / 4000.0;
    ss.push_back(s);
    ff.push_back(s * s * s - s);
  }
  const auto tab = NonlinearitySpec::table(2.0, 3, SampledTable(ss, ff));
  for (double s : {0.25, 1.0, 3.3, 9.9}) {
    EXPECT_NEAR(eval_f(tab, s), eval_f(ref, s), 1e-5 * (1 + s * s * s));
    EXPECT_NEAR(eval_F(tab, s), eval_F(ref, s), 1e-5 * (1 + s * s * s * s));
  }
  EXPECT_THROW(eval_f(tab, 11.0), DomainError);
}

TEST(EvalF, TableFileLoader) {
  const std::string path = ::testing::TempDir() + "/ftable.txt";
  {
    std::ofstream out(path);
    out << "# s f\n0 0\n0.5 -0.25\n1 0\n2 2\n\n3 6   # trailing comment\n";
  }
  const SampledTable t = SampledTable::load(path);
  EXPECT_EQ(t.abscissae().size(), 5u);
  EXPECT_DOUBLE_EQ(t(2.0), 2.0);
  {
    std::ofstream out(path);
    out << "0 0 1\n";
  }
  EXPECT_THROW(SampledTable::load(path), DomainError);
}

TEST(FStar, PrototypeAndHump) {
  const auto spec = proto(2.0, 3, 4.0, 2.0);
  EXPECT_DOUBLE_EQ(eval_fstar(spec, 3.0), eval_f(spec, 3.0));
  EXPECT_EQ(eval_fstar(spec, 1.0), 0.0);
  EXPECT_THROW(eval_fstar(spec, 0.5), DomainError);

  const auto user = NonlinearitySpec::user(2.0, 3, hump);
  // brute force maximum over a 1e6-point grid on [1, 2.5]
  double brute = 0.0;
  for (int i = 0; i <= 1000000; ++i) brute = std::max(brute, hump(1.0 + 1.5 * i / 1e6));
  EXPECT_NEAR(eval_fstar(user, 2.5), brute, 1e-12);
  EXPECT_NEAR(eval_fstar(user, 2.5), hump(2.0), 1e-12);
  EXPECT_EQ(eval_fstar(user, 1.0), 0.0);
  double prev = 0.0;
  for (int i = 1; i <= 200; ++i) {
    const double s = 1.0 + 0.05 * i;
    const double v = eval_fstar(user, s);
    EXPECT_GE(v + 1e-12, prev);
    EXPECT_GE(v + 1e-15, hump(s));
    prev = v;
  }
}

TEST(C1, PrototypeCases) {
  EXPECT_NEAR(compute_c1(proto(2.0, 3, 4.0, 2.0)), 2.0, 1e-8);
  EXPECT_NEAR(compute_c1(proto(2.0, 3, 5.0, 2.5)), 2.5, 1e-8);
  EXPECT_TRUE(std::isinf(compute_c1(proto(3.0, 3, 5.0, 3.0))));
  EXPECT_GT(compute_c1(proto(3.0, 3, 5.0, 3.0)), 0.0);
  EXPECT_EQ(compute_c1(proto(1.5, 3, 2.5, 1.5)), 0.0);
}

TEST(C1, OneSidedDisagreementIsInconclusive) {
  auto spec = NonlinearitySpec::user(2.0, 3, [](double s) { return s < 1.0 ? (s - 1.0) : 3.0 * (s - 1.0); });
  EXPECT_THROW(compute_c1(spec), InconclusiveError);
}

TEST(Hypotheses, PrototypeSubcritical) {
  const auto spec = proto(2.0, 3, 4.0, 2.0);
  const auto rep = check_hypotheses(spec);
  EXPECT_EQ(rep.eq.status, Status::verified_on_grid);
  EXPECT_EQ(rep.zero.status, Status::verified_on_grid);
  EXPECT_EQ(rep.reg.status, Status::verified_on_grid);
  EXPECT_EQ(rep.subc.status, Status::verified_on_grid);
  EXPECT_LT(4.0, std::pow(rep.eta, 4.0) * 6.0);
  ASSERT_TRUE(rep.fit.has_value());
  EXPECT_GT(rep.fit->epsilon, 0.0);
  const double pstar = 6.0;
  for (double s = rep.fit->s_eps * 1.01; s < 1e6; s *= 1.7)
    EXPECT_LE(eval_f(spec, s), rep.fit->C_eps * std::pow(s, pstar - 1.0 - rep.fit->epsilon) * (1 + 1e-12));
}

TEST(Hypotheses, SupercriticalPrototypeViolates) {
  NonlinearitySpec spec = proto(2.0, 3, 7.0, 2.0);
  const auto rep = check_hypotheses(spec);
  EXPECT_EQ(rep.subc.status, Status::violated);
  ASSERT_TRUE(rep.subc.witness.has_value());
  // brute-force: the quotient at the witness is at least p* for every eta
  for (double eta : {0.2, 0.5, 0.9, 0.99}) {
    const double s = *rep.subc.witness;
    EXPECT_GE(eval_fstar(spec, s) * s / eval_F(spec, eta * s), 6.0);
  }
}

TEST(Hypotheses, BoundedSublinear) {
  auto spec = NonlinearitySpec::user(2.0, 3, [](double s) { return s * (s - 1.0) / (1.0 + s * s); });
  const auto rep = check_hypotheses(spec);
  EXPECT_EQ(rep.subl.status, Status::verified_on_grid);
  EXPECT_GT(rep.M, 0.0);
  EXPECT_EQ(rep.eq.status, Status::verified_on_grid);
}

TEST(Hypotheses, SignViolationCarriesWitness) {
  auto spec = NonlinearitySpec::user(2.0, 3, [](double s) { return s * (s - 1.0) * (s - 3.0); });
  const auto rep = check_hypotheses(spec);
  EXPECT_EQ(rep.eq.status, Status::violated);
  ASSERT_TRUE(rep.eq.witness.has_value());
  const double w = *rep.eq.witness;
  const double fw = eval_f(spec, w);
  EXPECT_TRUE((w < 1.0 && fw >= 0.0) || (w > 1.0 && fw <= 0.0));
}

TEST(Spec, PrototypeValidation) {
  EXPECT_NO_THROW(proto(2.0, 3, 4.0, 2.0).validate(true));
  EXPECT_THROW(proto(2.0, 3, 7.0, 2.0).validate(true), DomainError);
  EXPECT_NO_THROW(proto(2.0, 3, 7.0, 2.0).validate(false));
  EXPECT_THROW(proto(2.0, 3, 4.0, 1.5).validate(false), DomainError);
}
