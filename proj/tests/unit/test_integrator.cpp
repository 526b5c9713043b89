#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "vsr/errors.hpp"
#include "vsr/integrator.hpp"

using namespace vsr;

TEST(Dopri5, LinearDecay) {
  const OdeRhs rhs = [](double, std::span<const double> y, std::span<double> d) {
    d[0] = -y[0];
  };
  const std::vector<double> ts{0.0, 0.5, 1.0, 3.0};
  const auto out = integrate_dopri5(rhs, {2.0}, ts, {.rtol = 1e-12, .atol = 1e-14});
  ASSERT_EQ(out.size(), ts.size());
  EXPECT_EQ(out[0][0], 2.0);
  for (std::size_t j = 0; j < ts.size(); ++j)
    EXPECT_NEAR(out[j][0], 2.0 * std::exp(-ts[j]), 1e-11);
}

TEST(Dopri5, HarmonicOscillator) {
  const OdeRhs rhs = [](double, std::span<const double> y, std::span<double> d) {
    d[0] = y[1];
    d[1] = -y[0];
  };
  const auto y = integrate_dopri5(rhs, {1.0, 0.0}, 2.0, {.rtol = 1e-12, .atol = 1e-14});
  EXPECT_NEAR(y[0], std::cos(2.0), 1e-10);
  EXPECT_NEAR(y[1], -std::sin(2.0), 1e-10);
}

TEST(Dopri5, TimeDependentRhs) {
  const OdeRhs rhs = [](double t, std::span<const double>, std::span<double> d) {
    d[0] = 3 * t * t;
  };
  const auto y = integrate_dopri5(rhs, {0.0}, 1.5, {});
  EXPECT_NEAR(y[0], 3.375, 1e-9);
}

TEST(Dopri5, FiniteEscapeDetected) {
  // y' = y^2, y(0) = 1 escapes at t = 1.
  const OdeRhs rhs = [](double, std::span<const double> y, std::span<double> d) {
    d[0] = y[0] * y[0];
  };
  try {
    integrate_dopri5(rhs, {1.0}, 2.0, {});
    FAIL() << "expected FiniteEscape";
  } catch (const FiniteEscape& e) {
    EXPECT_NEAR(e.time(), 1.0, 1e-3);
  }
  EXPECT_NO_THROW(integrate_dopri5(rhs, {1.0}, 0.9, {}));
}

TEST(Dopri5, StatsAndZeroHorizon) {
  const OdeRhs rhs = [](double, std::span<const double> y, std::span<double> d) {
    d[0] = -y[0];
  };
  IntegrationStats stats;
  const auto y = integrate_dopri5(rhs, {1.0}, 0.0, {}, &stats);
  EXPECT_EQ(y[0], 1.0);
  integrate_dopri5(rhs, {1.0}, 5.0, {}, &stats);
  EXPECT_GT(stats.accepted, 0u);
}
