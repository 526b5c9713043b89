#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vsr/bounds.hpp"
#include "vsr/certifier.hpp"
#include "vsr/cubic_example.hpp"
#include "vsr/falsifier.hpp"
#include "vsr/models.hpp"
#include "vsr/trajectory.hpp"

using namespace vsr;

namespace {

constexpr int kCases = 1000;

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  double operator()(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }

 private:
  std::mt19937_64 rng_;
};

// A random class-K-infinity function from a few families.
ComparisonFn random_k(Draw& d) {
  switch (d.index(5)) {
    case 0:
      return ComparisonFn::power(d(0.1, 5), d(0.5, 4));
    case 1: {
      const double c = d(0.1, 3), p = d(1, 3);
      return ComparisonFn::from_expression(std::to_string(c) + "*pow(s," + std::to_string(p) +
                                           ")+s");
    }
    case 2: {
      std::vector<double> s, f;
      double x = 0, y = 0;
      for (int i = 0; i < 6; ++i) {
        s.push_back(x += d(0.1, 2));
        f.push_back(y += d(0.1, 2));
      }
      return ComparisonFn::table(s, f);
    }
    case 3:
      return max_k(ComparisonFn::power(d(0.5, 2), 2), ComparisonFn::power(d(0.5, 2), 1));
    default:
      return compose_k(ComparisonFn::power(d(0.5, 2), d(0.5, 2)),
                       ComparisonFn::from_expression("exp(s)-1"));
  }
}

double loop_ref(double x, double e, double T) {
  const double v = x + e;
  return x + T * (x * x * x - v - 3 * v * v * v);
}

}  // namespace

TEST(Property, ComparisonFnStrictlyIncreasing) {
  Draw d(1);
  for (int i = 0; i < kCases; ++i) {
    const auto f = random_k(d);
    const double s1 = d(0, 3), s2 = s1 + d(1e-6, 2);
    EXPECT_EQ(f(0.0), 0.0);
    EXPECT_LT(f(s1), f(s2)) << f.describe() << ' ' << s1 << ' ' << s2;
  }
}

TEST(Property, InverseRoundTrip) {
  Draw d(2);
  for (int i = 0; i < kCases; ++i) {
    const auto f = random_k(d);
    const double s = d(1e-3, 3);
    const double back = invert_k(f, f(s));
    EXPECT_NEAR(back, s, 1e-8 * s) << f.describe();
    EXPECT_GE(f(back), f(s));
  }
}

TEST(Property, CompositionAssociative) {
  Draw d(3);
  for (int i = 0; i < kCases; ++i) {
    const auto f = random_k(d), g = random_k(d), h = random_k(d);
    const double s = d(0, 0.5);
    const double left = compose_k(compose_k(f, g), h)(s);
    const double right = compose_k(f, compose_k(g, h))(s);
    EXPECT_NEAR(left, right, 1e-12 * std::max(1.0, std::fabs(left)));
    EXPECT_NEAR(left, f(g(h(s))), 1e-12 * std::max(1.0, std::fabs(left)));
  }
}

TEST(Property, KLFromCertificateMonotone) {
  Draw d(4);
  for (int i = 0; i < kCases; ++i) {
    const double c1 = d(0.5, 1.0), c2 = d(1.0, 2.0);
    const double p = d(1.0, 3.0);
    // alpha3 at least as steep as alpha2 near 0 keeps the rate Lipschitz there; a
    // sublinear rate drives the flow to 0 in finite time.
    const auto b = beta_from_certificate(ComparisonFn::power(c1, p), ComparisonFn::power(c2, p),
                                         ComparisonFn::power(d(0.2, 3), p + d(0, 2)));
    const double s1 = d(0.01, 2), s2 = s1 + d(1e-3, 1);
    const double t1 = d(0, 3), t2 = t1 + d(1e-2, 3);
    EXPECT_LT(b(s1, t1), b(s2, t1));
    EXPECT_LT(b(s1, t2), b(s1, t1));
    // alpha1 <= alpha2 gives beta(s, 0) >= s.
    EXPECT_GE(b(s1, 0.0), s1 * (1 - 1e-12));
  }
}

TEST(Property, ChainIdentityAtZeroTime) {
  Draw d(5);
  for (int i = 0; i < kCases; ++i) {
    const auto a = random_k(d);
    const auto b = beta_from_certificate(a, a, random_k(d));
    const double s = d(0, 2);
    EXPECT_NEAR(b(s, 0.0), s, 1e-8 * std::max(1.0, s));
  }
}

TEST(Property, FlowMonotoneAndSemigroup) {
  Draw d(6);
  for (int i = 0; i < kCases; ++i) {
    const auto a = random_k(d);
    const double s1 = d(0.01, 2), s2 = s1 + d(0, 1);
    const double t1 = d(0, 2), t2 = d(0, 2);
    const double y1 = comparison_ode(a, s1, t1);
    EXPECT_LE(comparison_ode(a, s1, t1 + t2), y1);
    EXPECT_LE(y1, comparison_ode(a, s2, t1));
    EXPECT_NEAR(comparison_ode(a, y1, t2), comparison_ode(a, s1, t1 + t2), 1e-7 * s1);
  }
}

TEST(Property, MarginReproducibleAndOrderIndependent) {
  Draw d(7);
  const auto model = make_model("cubic_example");
  for (int i = 0; i < kCases; ++i) {
    const double M = d(0.2, 2.5), K = d(0.005, 0.3);
    const auto cand = example::example_candidate(M, K);
    DecreaseGrid g;
    g.x.points_per_axis = 9;
    g.e.points_per_axis = 5;
    g.t_points = 4;
    const auto mode = i % 2 ? DecreaseMode::InputToState : DecreaseMode::RobustStability;
    const double T = d(0.01, 1.0);
    const auto a = certify_decrease(model, cand, mode, T, g);
    g.workers = 3;
    const auto b = certify_decrease(model, cand, mode, T, g);
    ASSERT_TRUE(a.witness);
    EXPECT_EQ(a.min_margin, b.min_margin);
    EXPECT_EQ(a.witness->x, b.witness->x);
    const auto& w = *a.witness;
    EXPECT_EQ(decrease_margin(model, cand, w.x, w.e, w.T), a.min_margin);
    // Independent closed form of the same margin.
    const double x = w.x[0], e = w.e[0], f = loop_ref(x, e, w.T);
    const double oracle = -(f * f - x * x + w.T * (3 * x * x * x * x + x * x));
    EXPECT_NEAR(a.min_margin, oracle, 1e-12 * std::max(1.0, std::fabs(oracle)));
    EXPECT_EQ(a.verdict == Verdict::CertifiedOnGrid, a.min_margin >= 0.0);
  }
}

TEST(Property, GridRefinementNeverRaisesMinimum) {
  Draw d(8);
  const auto model = make_model("cubic_example");
  for (int i = 0; i < kCases; ++i) {
    const auto cand = example::example_candidate(d(0.2, 2.0), d(0.005, 0.2));
    const double T = d(0.01, 1.0);
    const std::size_t k = 1 + d.index(3);
    DecreaseGrid coarse, fine;
    coarse.x.points_per_axis = 4 * k + 1;
    coarse.e.points_per_axis = 2 * k + 1;
    coarse.t_points = 2 * k - 1;
    fine.x.points_per_axis = 8 * k + 1;
    fine.e.points_per_axis = 4 * k + 1;
    fine.t_points = 4 * k - 1;
    const auto mode = i % 2 ? DecreaseMode::InputToState : DecreaseMode::RobustStability;
    const auto a = certify_decrease(model, cand, mode, T, coarse);
    const auto b = certify_decrease(model, cand, mode, T, fine);
    EXPECT_LE(b.min_margin, a.min_margin);
  }
}

TEST(Property, ConverseEstimateAboveAlpha1) {
  Draw d(9);
  const auto model = make_model("cubic_example");
  for (int i = 0; i < kCases; ++i) {
    const auto a1 = random_k(d);
    const Vec xi{d(-1.5, 1.5)};
    const double v = converse_lyapunov_estimate(
        model, a1, xi,
        {.horizon = 10, .scenarios = 2, .seed = static_cast<std::uint64_t>(i), .T_star = d(0.01, 0.1)});
    EXPECT_GE(v, a1(std::fabs(xi[0])));
  }
}

TEST(Property, TrajectoryDeterminismAndClock) {
  Draw d(10);
  const auto model = make_model("cubic_example");
  for (int i = 0; i < kCases; ++i) {
    EnsembleSpec spec;
    spec.scenarios = 1;
    spec.sampling = {.T_max = d(0.01, 0.1), .length = 50};
    spec.errors = {.mode = ErrorMode::IIDBall, .bound = d(0, 0.05), .dim = 1};
    spec.seed = static_cast<std::uint64_t>(i);
    const auto sc = make_scenario(spec, 1, 0);
    const auto a = simulate(model, sc.x0, sc.periods, sc.errors);
    const auto b = simulate(model, sc.x0, sc.periods, sc.errors);
    EXPECT_EQ(a.states, b.states);
    double sum = 0.0;
    for (double T : sc.periods) sum += T;
    EXPECT_NEAR(a.elapsed.back(), sum, 1e-12 * sum);
    for (std::size_t k = 0; k + 1 < a.states.size(); ++k)
      EXPECT_EQ(a.states[k + 1][0], model(a.states[k], sc.errors[k], sc.periods[k])[0]);
    for (const auto& e : sc.errors) EXPECT_LE(norm(e), spec.errors.bound);
    for (double T : sc.periods) {
      EXPECT_GT(T, 0.0);
      EXPECT_LT(T, spec.sampling.T_max);
    }
  }
}

TEST(Property, ReplayMatchesHandEnvelope) {
  Draw d(11);
  const auto model = make_model("cubic_example");
  const EnvelopeClaim claim{KLFn::from_expression("1.2*s*exp(-t)"),
                            ComparisonFn::power(3, 1), 0.01, 1.0, 0.05, 0.2};
  for (int i = 0; i < kCases; ++i) {
    Scenario sc;
    sc.x0 = {d(-1, 1)};
    for (int k = 0; k < 30; ++k) {
      sc.periods.push_back(d(1e-3, 0.2));
      sc.errors.push_back({d(-0.05, 0.05)});
    }
    const auto r1 = replay(model, claim, sc);
    const auto r2 = replay(model, claim, sc);
    EXPECT_EQ(r1.score, r2.score);
    double x = sc.x0[0], t = 0, es = 0, worst = -INFINITY;
    for (std::size_t k = 0; k <= sc.periods.size(); ++k) {
      worst = std::max(worst, std::fabs(x) - (1.2 * std::fabs(sc.x0[0]) * std::exp(-t) + 3 * es + 0.01));
      if (k == sc.periods.size()) break;
      x = loop_ref(x, sc.errors[k][0], sc.periods[k]);
      t += sc.periods[k];
      es = std::max(es, std::fabs(sc.errors[k][0]));
    }
    EXPECT_NEAR(r1.score, worst, 1e-12);
    EXPECT_EQ(r1.violated, worst > 1e-12 * (1 + std::fabs(r1.rhs)));
  }
}

TEST(Property, TightIntegrationToleranceHalving) {
  Draw d(12);
  const auto f = parse_vector_field("x1^3+u1");
  for (int i = 0; i < kCases; ++i) {
    const double tol = std::pow(10.0, d(-10, -6));
    DiscreteStepMap a{StepMethod::TightIntegration, f, tol};
    DiscreteStepMap b{StepMethod::TightIntegration, f, tol / 2};
    const Vec x{d(-1, 1)}, u{d(-4, 4)};
    const double T = d(1e-3, 0.08);
    EXPECT_LT(std::fabs(discretize_step(a, x, u, T)[0] - discretize_step(b, x, u, T)[0]), tol);
  }
}

TEST(Property, EulerLocalErrorQuadratic) {
  Draw d(13);
  const auto f = parse_vector_field("x1^3+u1");
  const DiscreteStepMap euler{StepMethod::Euler, f};
  const DiscreteStepMap tight{StepMethod::TightIntegration, f, 1e-13};
  for (int i = 0; i < kCases; ++i) {
    const Vec x{d(-1, 1)}, u{d(-1, 1)};
    const double T = d(1e-4, 1e-2);
    // |x''| = |3x^2 (x^3 + u)| <= 3 (1.03)^2 (1.03^3 + 1) on the reachable set.
    const double err = std::fabs(discretize_step(euler, x, u, T)[0] -
                                 discretize_step(tight, x, u, T)[0]);
    EXPECT_LE(err, 3.4 * T * T + 1e-12);
  }
}

TEST(Property, ExistenceHorizonSound) {
  Draw d(14);
  const auto f = parse_vector_field("x1^3+u1");
  const auto h = existence_horizon(f, Box::symmetric(1, 1.0), Box::symmetric(1, 4.0));
  const DiscreteStepMap tight{StepMethod::TightIntegration, f, 1e-10};
  for (int i = 0; i < kCases; ++i) {
    const Vec x{d(-1, 1)}, u{d(-4, 4)};
    EXPECT_NO_THROW(discretize_step(tight, x, u, 0.99 * h.Tstar));
  }
}
