#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vsr/linalg.hpp"

namespace vsr {

/// `count` evenly spaced points on [lo, hi] including both ends; a single
/// point (or lo == hi) yields {hi}.
std::vector<double> linspace(double lo, double hi, std::size_t count);

/// Points T_j = bound * j / (count + 1), j = 1..count: the open interval
/// (0, bound) with both endpoints excluded.
std::vector<double> open_interval_points(double bound, std::size_t count);

/// Cartesian product of per-axis point lists, enumerated in row-major order.
class TensorGrid {
 public:
  explicit TensorGrid(std::vector<std::vector<double>> axes);
  std::size_t size() const { return size_; }
  std::size_t dim() const { return axes_.size(); }
  void point(std::size_t index, std::span<double> out) const;
  Vec point(std::size_t index) const;
  const std::vector<double>& axis(std::size_t i) const { return axes_[i]; }

 private:
  std::vector<std::vector<double>> axes_;
  std::size_t size_ = 1;
};

/// Latin-hypercube sample of the box [-half_width, half_width]^dim.
std::vector<Vec> latin_hypercube(std::size_t dim, std::size_t count,
                                 double half_width, std::uint64_t seed);

struct BallGridSpec {
  /// Per-axis points for tensor grids (dimensions <= tensor_max_dim).
  std::size_t points_per_axis = 33;
  std::size_t tensor_max_dim = 2;
  /// Sample count for Latin-hypercube grids in higher dimensions.
  std::size_t lhs_samples = 4096;
  std::uint64_t seed = 0;
};

/// Points of {|v| <= radius} in `dim` dimensions: a filtered tensor grid in low
/// dimensions, a filtered Latin-hypercube sample otherwise. The origin is
/// always included. Points are returned in a fixed, deterministic order.
std::vector<Vec> ball_points(std::size_t dim, double radius,
                             const BallGridSpec& spec);

/// Largest distance from any point of the ball to its nearest grid point is
/// bounded by this value (tensor grids: half the cell diagonal).
double ball_grid_cell_radius(std::size_t dim, double radius,
                             const BallGridSpec& spec);

}  // namespace vsr
