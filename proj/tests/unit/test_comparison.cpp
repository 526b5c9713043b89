#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "vsr/comparison.hpp"
#include "vsr/errors.hpp"
#include "vsr/grid.hpp"

using namespace vsr;

namespace {

// Plain bisection used as an independent inverse.
double bisect(double (*f)(double), double y, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double alpha3_ref(double s) { return 3 * s * s * s * s + s * s; }

// Closed-form flow of dy/dt = -(3y^2 + y).
double quartic_flow_ref(double s, double t) {
  const double w = s / (3 * s + 1) * std::exp(-t);
  return w / (1 - 3 * w);
}

}  // namespace

TEST(ComparisonFn, Evaluation) {
  const auto sq = ComparisonFn::from_expression("pow(s,2)");
  EXPECT_DOUBLE_EQ(eval_k(sq, 3.0), 9.0);
  EXPECT_EQ(eval_k(sq, 0.0), 0.0);
  const auto a3 = ComparisonFn::from_expression("3*pow(s,4)+pow(s,2)");
  EXPECT_DOUBLE_EQ(eval_k(a3, 1.0), 4.0);
  EXPECT_EQ(eval_k(a3, 0.0), 0.0);
  EXPECT_THROW(eval_k(sq, -1.0), std::invalid_argument);
}

TEST(ComparisonFn, Inversion) {
  const auto sq = ComparisonFn::from_expression("pow(s,2)");
  EXPECT_DOUBLE_EQ(invert_k(sq, 4.0), 2.0);
  EXPECT_EQ(invert_k(sq, 0.0), 0.0);
  const auto a3 = ComparisonFn::from_expression("3*pow(s,4)+pow(s,2)");
  const double s = invert_k(a3, 4.0);
  EXPECT_NEAR(s, bisect(alpha3_ref, 4.0, 0.0, 2.0), 1e-10);
  EXPECT_NEAR(s, 1.0, 1e-10);
  EXPECT_GE(a3(s), 4.0);
}

TEST(ComparisonFn, InversionRangeExceeded) {
  const auto f = ComparisonFn::from_expression("tanh(s)", ClassKind::K, 10.0);
  EXPECT_THROW(invert_k(f, 2.0), RangeExceeded);
  const auto t = ComparisonFn::table({1, 2}, {1, 3}, ClassKind::K, Extrapolation::None);
  EXPECT_THROW(invert_k(t, 5.0), RangeExceeded);
  EXPECT_DOUBLE_EQ(invert_k(t, 2.0), 1.5);
}

TEST(ComparisonFn, Tables) {
  const auto t = ComparisonFn::table({1, 2}, {2, 3});
  EXPECT_DOUBLE_EQ(t(0.5), 1.0);
  EXPECT_DOUBLE_EQ(t(1.5), 2.5);
  EXPECT_DOUBLE_EQ(t(4.0), 5.0);
  EXPECT_TRUE(t.extrapolated_at(4.0));
  EXPECT_FALSE(t.extrapolated_at(1.0));

  const auto hard = ComparisonFn::table({1, 2}, {2, 3}, ClassKind::K, Extrapolation::None);
  EXPECT_THROW(eval_k(hard, 2.5), DomainExceeded);
  EXPECT_THROW(ComparisonFn::table({1, 1}, {1, 2}), InvalidSpec);
  EXPECT_THROW(ComparisonFn::table({1, 2}, {2, 1}), InvalidSpec);
  EXPECT_THROW(ComparisonFn::table({0, 1}, {1, 2}), InvalidSpec);
}

TEST(ComparisonFn, Composition) {
  const auto outer = ComparisonFn::from_expression("2*s");
  const auto inner = ComparisonFn::from_expression("pow(s,2)");
  EXPECT_DOUBLE_EQ(compose_k(outer, inner)(3.0), 18.0);

  const auto a3 = ComparisonFn::from_expression("3*pow(s,4)+pow(s,2)");
  const auto id = compose_k(a3, ComparisonFn::identity());
  for (double s : linspace(0.0, 3.0, 31)) EXPECT_DOUBLE_EQ(id(s), a3(s));

  const auto alpha = compose_k(a3, inverse_k(inner));
  EXPECT_NEAR(alpha(4.0), 52.0, 1e-12);
  for (double v : linspace(0.0, 5.0, 21))
    EXPECT_NEAR(alpha(v), 3 * v * v + v, 1e-12 * (1 + v * v));
}

TEST(ComparisonFn, CompositionDomain) {
  const auto hard = ComparisonFn::table({1, 2}, {2, 3}, ClassKind::K, Extrapolation::None);
  const auto big = ComparisonFn::from_expression("10*s");
  EXPECT_THROW(compose_k(hard, big), DomainMismatch);
  const auto bounded = ComparisonFn::from_expression("2*s", ClassKind::KInfinity, 100.0);
  const auto c = compose_k(bounded, big);
  EXPECT_LE(c.domain_hint(), 10.0 + 1e-9);
}

TEST(ComparisonFn, ScaleAndMax) {
  const auto sq = ComparisonFn::power(1, 2);
  const auto lin = ComparisonFn::identity();
  EXPECT_DOUBLE_EQ(scale_k(3.0, sq)(2.0), 12.0);
  const auto m = max_k(sq, lin);
  EXPECT_DOUBLE_EQ(m(0.5), 0.5);
  EXPECT_DOUBLE_EQ(m(2.0), 4.0);
  EXPECT_NEAR(invert_k(m, 0.25), 0.25, 1e-12);
  EXPECT_NEAR(invert_k(m, 9.0), 3.0, 1e-9);
}

TEST(ComparisonFn, PowerInverseExact) {
  const auto p = ComparisonFn::power(0.5, 3);
  for (double s : {0.1, 0.7, 1.0, 2.5, 40.0}) {
    const double back = invert_k(p, p(s));
    EXPECT_NEAR(back, s, 1e-14 * s);
    EXPECT_GE(p(back), p(s));
  }
}

TEST(ComparisonFn, ClassKCheck) {
  const auto samples = linspace(0.0, 5.0, 51);
  EXPECT_FALSE(check_class_k(ComparisonFn::from_expression("exp(s)-1"), samples));
  EXPECT_TRUE(check_class_k(ComparisonFn::from_expression("s*(2-s)"), samples));
  EXPECT_TRUE(check_class_k(ComparisonFn::from_expression("s+1"), samples));
}

TEST(KLFn, ClosedForm) {
  const auto b = KLFn::from_expression("s*exp(-t)");
  EXPECT_DOUBLE_EQ(b(2.0, 0.0), 2.0);
  EXPECT_NEAR(b(2.0, 1.0), 2.0 * std::exp(-1.0), 1e-15);
  EXPECT_FALSE(b.is_flow());
}

TEST(KLFn, LinearFlowMatchesExponential) {
  const auto id = ComparisonFn::identity();
  const auto b = KLFn::from_flow(id, id, id);
  ASSERT_TRUE(b.is_flow());
  for (double s : {0.1, 1.0, 5.0})
    for (double t : {0.0, 0.3, 1.0, 4.0})
      EXPECT_NEAR(b(s, t), s * std::exp(-t), 1e-9 * s);
}

TEST(KLFn, QuarticFlowClosedForm) {
  const auto rate = ComparisonFn::from_expression("3*pow(s,2)+s");
  const std::vector<double> ts{0.0, 0.1, 0.5, 1.0, 2.0, 5.0};
  for (double s : {0.01, 0.5, 1.0, 3.0}) {
    const auto y = comparison_flow(rate, s, ts);
    ASSERT_EQ(y.size(), ts.size());
    for (std::size_t j = 0; j < ts.size(); ++j)
      EXPECT_NEAR(y[j], quartic_flow_ref(s, ts[j]), 1e-9 * s) << s << ' ' << ts[j];
  }
}

TEST(KLFn, EvalAlongMatchesPointwise) {
  const auto rate = ComparisonFn::from_expression("3*pow(s,2)+s");
  const auto b = KLFn::from_flow(rate, ComparisonFn::power(1, 2), ComparisonFn::power(1, 2), 2.0);
  const std::vector<double> ts{0.0, 0.2, 0.2, 1.0, 3.0};
  const auto along = b.eval_along(1.5, ts);
  for (std::size_t j = 0; j < ts.size(); ++j)
    EXPECT_NEAR(along[j], b(1.5, ts[j]), 1e-9);
  // scale 2 on the squared flow: beta(s,0) = sqrt(2) s.
  EXPECT_NEAR(b(1.5, 0.0), std::sqrt(2.0) * 1.5, 1e-12);
}

TEST(KLFn, SemigroupOfFlow) {
  const auto rate = ComparisonFn::from_expression("3*pow(s,2)+s");
  const auto id = ComparisonFn::identity();
  const auto b = KLFn::from_flow(rate, id, id);
  for (double s : {0.2, 1.0, 4.0})
    for (double t1 : {0.1, 0.7})
      for (double t2 : {0.05, 1.3})
        EXPECT_NEAR(b(b(s, t1), t2), b(s, t1 + t2), 1e-8 * s);
}

TEST(KLFn, ClassKLCheck) {
  const auto s = linspace(0.0, 4.0, 21);
  const auto t = linspace(0.0, 10.0, 21);
  EXPECT_FALSE(check_class_kl(KLFn::from_expression("s*exp(-t)"), s, t));
  EXPECT_TRUE(check_class_kl(KLFn::from_expression("s"), s, t));
  EXPECT_TRUE(check_class_kl(KLFn::from_expression("s*exp(t)"), s, t));
}
