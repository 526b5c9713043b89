#include "vsr/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vsr/errors.hpp"
#include "vsr/random.hpp"

namespace vsr {

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count == 0) return {};
  if (count == 1 || lo == hi) return {hi};
  std::vector<double> out(count);
  const double span = hi - lo;
  for (std::size_t i = 0; i < count; ++i)
    out[i] = lo + span * static_cast<double>(i) / static_cast<double>(count - 1);
  out.back() = hi;
  return out;
}

std::vector<double> open_interval_points(double bound, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t j = 1; j <= count; ++j)
    out[j - 1] = bound * static_cast<double>(j) / static_cast<double>(count + 1);
  return out;
}

TensorGrid::TensorGrid(std::vector<std::vector<double>> axes)
    : axes_(std::move(axes)) {
  for (const auto& a : axes_) size_ *= a.size();
}

void TensorGrid::point(std::size_t index, std::span<double> out) const {
  for (std::size_t d = axes_.size(); d-- > 0;) {
    const std::size_t len = axes_[d].size();
    out[d] = axes_[d][index % len];
    index /= len;
  }
}

Vec TensorGrid::point(std::size_t index) const {
  Vec v(axes_.size());
  point(index, v);
  return v;
}

std::vector<Vec> latin_hypercube(std::size_t dim, std::size_t count,
                                 double half_width, std::uint64_t seed) {
  std::vector<Vec> pts(count, Vec(dim));
  for (std::size_t d = 0; d < dim; ++d) {
    auto eng = make_engine(seed, RngStream::Grid, d);
    std::vector<std::size_t> perm(count);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = count; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform01(eng) * static_cast<double>(i));
      std::swap(perm[i - 1], perm[std::min(j, i - 1)]);
    }
    for (std::size_t i = 0; i < count; ++i) {
      const double u = (static_cast<double>(perm[i]) + uniform01(eng)) /
                       static_cast<double>(count);
      pts[i][d] = -half_width + 2.0 * half_width * u;
    }
  }
  return pts;
}

std::vector<Vec> ball_points(std::size_t dim, double radius,
                             const BallGridSpec& spec) {
  if (radius < 0.0) throw EmptyDomain("negative ball radius");
  std::vector<Vec> out;
  if (dim == 0) {
    out.emplace_back();
    return out;
  }
  if (radius == 0.0) {
    out.emplace_back(dim, 0.0);
    return out;
  }
  const double tol = 1e-12 * radius;
  bool has_origin = false;
  if (dim <= spec.tensor_max_dim) {
    auto axis = linspace(-radius, radius, std::max<std::size_t>(spec.points_per_axis, 2));
    TensorGrid grid(std::vector<std::vector<double>>(dim, axis));
    Vec p(dim);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid.point(i, p);
      const double r = norm(p);
      if (r <= radius + tol) {
        has_origin = has_origin || r == 0.0;
        out.push_back(p);
      }
    }
  } else {
    for (auto& p : latin_hypercube(dim, spec.lhs_samples, radius, spec.seed)) {
      if (norm(p) <= radius + tol) out.push_back(std::move(p));
    }
  }
  if (!has_origin) out.emplace_back(dim, 0.0);
  return out;
}

double ball_grid_cell_radius(std::size_t dim, double radius,
                             const BallGridSpec& spec) {
  if (radius == 0.0 || dim == 0) return 0.0;
  if (dim <= spec.tensor_max_dim) {
    const double h = 2.0 * radius /
                     static_cast<double>(std::max<std::size_t>(spec.points_per_axis, 2) - 1);
    return 0.5 * h * std::sqrt(static_cast<double>(dim));
  }
  // Random designs carry no deterministic covering radius.
  return std::numeric_limits<double>::infinity();
}

}  // namespace vsr
