#include <gtest/gtest.h>

#include <cmath>

#include "vsr/certifier.hpp"
#include "vsr/cubic_example.hpp"
#include "vsr/errors.hpp"
#include "vsr/models.hpp"

using namespace vsr;

namespace {

LyapunovCandidate quadratic(const char* a1, const char* a2, const char* a3, double M,
                            double bound = 0.0) {
  return {parse_lyapunov("pow(s,2)", 1),
          "pow(s,2)",
          ComparisonFn::from_expression(a1),
          ComparisonFn::from_expression(a2),
          ComparisonFn::from_expression(a3),
          std::nullopt,
          M,
          bound};
}

}  // namespace

TEST(Lyapunov, ParseUsesNormAndComponents) {
  const auto V = parse_lyapunov("x1^2 + 2*x2^2 + s", 2);
  EXPECT_DOUBLE_EQ(V(Vec{3.0, 4.0}), 9.0 + 32.0 + 5.0);
  EXPECT_THROW(parse_lyapunov("x3", 2), ParseError);
}

TEST(Sandwich, EqualityCase) {
  const auto rep = check_sandwich(quadratic("pow(s,2)", "pow(s,2)", "s", 1.0), 1);
  EXPECT_EQ(rep.verdict, Verdict::CertifiedOnGrid);
  EXPECT_EQ(rep.min_margin, 0.0);
  EXPECT_EQ(rep.grid.x_points, 33u);
  EXPECT_FALSE(rep.caveats.empty());
}

TEST(Sandwich, ScaledLowerBoundViolated) {
  const auto rep = check_sandwich(quadratic("2*pow(s,2)", "2*pow(s,2)", "s", 1.0), 1);
  ASSERT_EQ(rep.verdict, Verdict::ViolatedAt);
  ASSERT_TRUE(rep.witness);
  const double x = rep.witness->x[0];
  EXPECT_DOUBLE_EQ(std::fabs(x), 1.0);
  EXPECT_DOUBLE_EQ(rep.min_margin, -x * x);
}

TEST(Sandwich, QuarticBelowQuadratic) {
  auto cand = quadratic("pow(s,2)", "pow(s,2)", "s", 0.5);
  cand.V = parse_lyapunov("pow(x1,4)", 1);
  const auto rep = check_sandwich(cand, 1);
  ASSERT_EQ(rep.verdict, Verdict::ViolatedAt);
  // Oracle: x^4 - x^2 on the 33-point grid of [-0.5, 0.5] is smallest at 0.5.
  double worst = 0.0;
  for (int i = 0; i < 33; ++i) {
    const double x = -0.5 + i / 32.0;
    worst = std::min(worst, x * x * x * x - x * x);
  }
  EXPECT_DOUBLE_EQ(rep.min_margin, worst);
  EXPECT_GT(std::fabs(rep.witness->x[0]), 0.0);
}

TEST(Sandwich, InfiniteValuesFailUpperBound) {
  auto cand = quadratic("pow(s,2)", "pow(s,2)", "s", 1.0);
  cand.V = parse_lyapunov("pow(s,2)/max(0, 0.5-s)", 1);
  const auto rep = check_sandwich(cand, 1);
  EXPECT_EQ(rep.verdict, Verdict::ViolatedAt);
  EXPECT_EQ(rep.min_margin, -INFINITY);
}

TEST(Decrease, ExampleCertifiedAtTtilde) {
  const auto model = make_model("cubic_example");
  const auto cand = example::example_candidate(1.0, 0.025);
  const double tt = example::example_ttilde(1.0, 0.025);
  EXPECT_NEAR(tt, 0.067783, 1e-6);
  const auto rep = certify_decrease(model, cand, DecreaseMode::InputToState, tt);
  EXPECT_EQ(rep.verdict, Verdict::CertifiedOnGrid);
  EXPECT_GE(rep.min_margin, 0.0);
  EXPECT_EQ(rep.T_used, tt);
  EXPECT_GT(rep.grid.excluded_by_region, 0u);
  EXPECT_GT(rep.grid.evaluated, 0u);
}

TEST(Decrease, LargePeriodViolated) {
  const auto model = make_model("cubic_example");
  const auto cand = example::example_candidate(1.0, 0.025);
  const auto rep = certify_decrease(model, cand, DecreaseMode::InputToState, 2.0);
  ASSERT_EQ(rep.verdict, Verdict::ViolatedAt);
  ASSERT_TRUE(rep.witness);
  EXPECT_LT(rep.min_margin, 0.0);
  EXPECT_NEAR(std::fabs(rep.witness->x[0]), 1.0, 0.1);
  EXPECT_GT(rep.witness->T, 1.0);
  // Witness reproduces its margin.
  EXPECT_EQ(decrease_margin(model, cand, rep.witness->x, rep.witness->e, rep.witness->T),
            rep.min_margin);
}

TEST(Decrease, IdentityHasNoDecrease) {
  const auto model = make_model("identity");
  const auto cand = quadratic("pow(s,2)", "pow(s,2)", "pow(s,2)", 1.0);
  const auto rep = certify_decrease(model, cand, DecreaseMode::RobustStability, 0.1);
  ASSERT_EQ(rep.verdict, Verdict::ViolatedAt);
  const auto& w = *rep.witness;
  EXPECT_DOUBLE_EQ(rep.min_margin, -w.T * w.x[0] * w.x[0]);
  // Worst point sits at |x| = M and the largest grid period.
  EXPECT_DOUBLE_EQ(std::fabs(w.x[0]), 1.0);
  EXPECT_DOUBLE_EQ(w.T, 0.1 * 32 / 33);
  for (double x : {0.3, -0.7})
    EXPECT_DOUBLE_EQ(decrease_margin(model, cand, Vec{x}, Vec{0.0}, 0.05), -0.05 * x * x);
}

TEST(Decrease, InfiniteVIsInconclusive) {
  const auto model = make_model("zero");
  auto cand = quadratic("pow(s,2)", "pow(s,2)", "pow(s,2)", 1.0);
  cand.V = parse_lyapunov("pow(s,2)/max(0, 0.5-s)", 1);
  EXPECT_TRUE(std::isnan(decrease_margin(model, cand, Vec{0.9}, Vec{0.0}, 0.05)));
  const auto rep = certify_decrease(model, cand, DecreaseMode::RobustStability, 0.1);
  EXPECT_GT(rep.grid.inconclusive, 0u);
  EXPECT_EQ(rep.verdict, Verdict::Inconclusive);
}

TEST(Decrease, EscapeIsNegativeInfinity) {
  const auto model = make_model("exact:x1^2+u1", "0*x1");
  const auto cand = quadratic("pow(s,2)", "pow(s,2)", "s", 1.0);
  EXPECT_EQ(decrease_margin(model, cand, Vec{1.0}, Vec{0.0}, 2.0), -INFINITY);
}

TEST(Decrease, InputToStateNeedsRho) {
  const auto model = make_model("cubic_example");
  const auto cand = quadratic("pow(s,2)", "pow(s,2)", "s", 1.0, 0.1);
  EXPECT_THROW(certify_decrease(model, cand, DecreaseMode::InputToState, 0.05), InvalidSpec);
  EXPECT_THROW(certify_decrease(model, example::example_candidate(1, 0.025),
                                DecreaseMode::InputToState, 0.0),
               InvalidSpec);
}

TEST(Decrease, RefinementNeverRaisesMinimum) {
  const auto model = make_model("cubic_example");
  const auto cand = example::example_candidate(1.0, 0.025);
  double prev = INFINITY;
  for (std::size_t k : {1u, 2u, 4u}) {
    DecreaseGrid g;
    g.x.points_per_axis = 8 * k + 1;
    g.e.points_per_axis = 4 * k + 1;
    g.t_points = 4 * k - 1;
    const auto rep = certify_decrease(model, cand, DecreaseMode::InputToState, 0.5, g);
    EXPECT_LE(rep.min_margin, prev);
    prev = rep.min_margin;
  }
}

TEST(Decrease, WorkerCountIrrelevant) {
  const auto model = make_model("cubic_example");
  const auto cand = example::example_candidate(1.0, 0.025);
  DecreaseGrid g1, g8;
  g8.workers = 8;
  const auto a = certify_decrease(model, cand, DecreaseMode::InputToState, 0.3, g1);
  const auto b = certify_decrease(model, cand, DecreaseMode::InputToState, 0.3, g8);
  EXPECT_EQ(a.min_margin, b.min_margin);
  EXPECT_EQ(a.witness->x, b.witness->x);
  EXPECT_EQ(a.witness->e, b.witness->e);
  EXPECT_EQ(a.witness->T, b.witness->T);
}

TEST(Decrease, LipschitzUpgrade) {
  const auto model = make_model("zero");
  const auto cand = quadratic("pow(s,2)", "pow(s,2)", "pow(s,2)", 1.0);
  DecreaseGrid g;
  g.lipschitz = 1e6;
  const auto rep = certify_decrease(model, cand, DecreaseMode::RobustStability, 0.1, g);
  ASSERT_TRUE(rep.lipschitz_rigorous);
  EXPECT_FALSE(*rep.lipschitz_rigorous);
}

TEST(MaxPeriod, ExampleAboveTtildeAndMonotoneInM) {
  const auto model = make_model("cubic_example");
  const auto one = max_sampling_period(model, example::example_candidate(1.0, 0.025),
                                       DecreaseMode::InputToState, {});
  const auto two = max_sampling_period(model, example::example_candidate(2.0, 0.025),
                                       DecreaseMode::InputToState, {});
  EXPECT_GE(one.T_max_certified, 0.0677);
  EXPECT_LE(two.T_max_certified, one.T_max_certified);
  EXPECT_EQ(one.report.verdict, Verdict::CertifiedOnGrid);
  ASSERT_TRUE(one.report.T_max_certified);
  EXPECT_EQ(*one.report.T_max_certified, one.T_max_certified);
}

TEST(MaxPeriod, IdentityNoneCertified) {
  const auto cand = quadratic("pow(s,2)", "pow(s,2)", "pow(s,2)", 1.0);
  EXPECT_THROW(max_sampling_period(make_model("identity"), cand,
                                   DecreaseMode::RobustStability, {}),
               NoneCertified);
}

TEST(Structural, ExampleOriginAndTables) {
  StructuralSpec spec;
  spec.M_grid = {1.0, 2.0};
  spec.E_grid = {0.0, 0.1};
  const auto rep = check_structural(make_model("cubic_example"), spec);
  EXPECT_EQ(rep.origin_residual, 0.0);
  EXPECT_TRUE(rep.delta_monotone);
  EXPECT_TRUE(rep.C_monotone);
  ASSERT_EQ(rep.C_table.size(), 4u);
  double c1 = 0, c2 = 0;
  for (const auto& b : rep.C_table) {
    if (b.M == 1.0 && b.E == 0.1) c1 = b.C;
    if (b.M == 2.0 && b.E == 0.1) c2 = b.C;
    // (M, 0, T_probe / 33) is a grid point.
    const double x = b.M, T = 0.05 / 33;
    EXPECT_GE(b.C, std::fabs(x + T * (-2 * x * x * x - x)));
  }
  EXPECT_GE(c2, c1);
  for (const auto& d : rep.delta_table)
    if (d.delta) EXPECT_LT(d.sup, d.eps);
}

TEST(Structural, GridSupMatchesOracle) {
  // Oracle: sup |x + T(x^3 - v - 3v^3)| over the same lattice, v = x + e.
  StructuralSpec spec;
  spec.M_grid = {1.0};
  spec.E_grid = {0.1};
  spec.eps_grid = {0.5};
  spec.points_per_axis = 11;
  spec.t_points = 4;
  const auto rep = check_structural(make_model("cubic_example"), spec);
  double sup = 0.0;
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j)
      for (int k = 1; k <= 4; ++k) {
        const double x = -1.0 + 0.2 * i, e = -0.1 + 0.02 * j, T = 0.05 * k / 5;
        const double v = x + e;
        sup = std::max(sup, std::fabs(x + T * (x * x * x - v - 3 * v * v * v)));
      }
  ASSERT_EQ(rep.C_table.size(), 1u);
  EXPECT_GE(rep.C_table[0].C, sup - 1e-12);
  EXPECT_LE(rep.C_table[0].C, sup * 1.05);
}

TEST(Structural, DriftOriginNotFixed) {
  try {
    check_structural(make_model("drift"), {});
    FAIL() << "expected OriginNotFixed";
  } catch (const OriginNotFixed& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}
