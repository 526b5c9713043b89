#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "vsr/grid.hpp"
#include "vsr/linalg.hpp"
#include "vsr/parallel.hpp"
#include "vsr/random.hpp"

using namespace vsr;

TEST(Grid, Linspace) {
  const auto v = linspace(-1.0, 1.0, 5);
  ASSERT_EQ(v.size(), 5u);
  EXPECT_EQ(v.front(), -1.0);
  EXPECT_EQ(v.back(), 1.0);
  EXPECT_DOUBLE_EQ(v[1], -0.5);
  EXPECT_EQ(linspace(0.0, 3.0, 1), std::vector<double>{3.0});
}

TEST(Grid, OpenIntervalPoints) {
  const auto v = open_interval_points(0.1, 4);
  ASSERT_EQ(v.size(), 4u);
  for (std::size_t j = 0; j < v.size(); ++j) EXPECT_DOUBLE_EQ(v[j], 0.1 * (j + 1) / 5.0);
  EXPECT_GT(v.front(), 0.0);
  EXPECT_LT(v.back(), 0.1);
}

TEST(Grid, TensorGridRowMajor) {
  TensorGrid g({{0, 1}, {10, 20, 30}});
  EXPECT_EQ(g.size(), 6u);
  EXPECT_EQ(g.point(0), (Vec{0, 10}));
  EXPECT_EQ(g.point(1), (Vec{0, 20}));
  EXPECT_EQ(g.point(5), (Vec{1, 30}));
}

TEST(Grid, BallPointsInsideAndContainOrigin) {
  for (std::size_t dim : {1u, 2u, 3u}) {
    const auto pts = ball_points(dim, 2.0, {.points_per_axis = 9, .lhs_samples = 500});
    bool origin = false;
    for (const auto& p : pts) {
      EXPECT_LE(norm(p), 2.0 + 1e-12);
      if (norm(p) == 0.0) origin = true;
    }
    EXPECT_TRUE(origin) << dim;
  }
  EXPECT_EQ(ball_points(1, 1.0, {.points_per_axis = 5}).size(), 5u);
}

TEST(Grid, LatinHypercubeStratified) {
  const std::size_t n = 64;
  const auto pts = latin_hypercube(3, n, 1.0, 7);
  ASSERT_EQ(pts.size(), n);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    std::set<std::size_t> strata;
    for (const auto& p : pts) {
      EXPECT_LE(std::fabs(p[axis]), 1.0);
      strata.insert(static_cast<std::size_t>((p[axis] + 1.0) / 2.0 * n));
    }
    EXPECT_EQ(strata.size(), n);
  }
  EXPECT_EQ(latin_hypercube(3, n, 1.0, 7), pts);
}

TEST(Random, EngineKeyedByIndex) {
  auto a = make_engine(1, RngStream::Errors, 5);
  auto b = make_engine(1, RngStream::Errors, 5);
  auto c = make_engine(1, RngStream::Periods, 5);
  const auto va = a();
  EXPECT_EQ(va, b());
  EXPECT_NE(va, c());
  double u = uniform01(a);
  EXPECT_GE(u, 0.0);
  EXPECT_LT(u, 1.0);
}

TEST(Parallel, MapIndependentOfWorkers) {
  auto f = [](std::size_t i) { return static_cast<double>(i * i); };
  const auto one = parallel_map<double>(1000, 1, f);
  const auto eight = parallel_map<double>(1000, 8, f);
  EXPECT_EQ(one, eight);
  EXPECT_THROW(parallel_chunks(10, 4,
                               [](std::size_t, std::size_t, std::size_t c) {
                                 if (c == 2) throw std::runtime_error("x");
                               }),
               std::runtime_error);
}

TEST(Linalg, NormAndCompensatedSum) {
  EXPECT_DOUBLE_EQ(norm(Vec{3, 4}), 5.0);
  EXPECT_DOUBLE_EQ(norm(Vec{3e200, 4e200}), 5e200);
  CompensatedSum s;
  for (int i = 0; i < 10; ++i) s.add(0.1);
  EXPECT_EQ(s.value(), 1.0);
}
