#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace vsr {

using Vec = std::vector<double>;

inline double norm(std::span<const double> v) {
  // Scaled accumulation keeps huge (near-escape) states from overflowing.
  double scale = 0.0;
  for (double c : v) scale = std::fmax(scale, std::fabs(c));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double acc = 0.0;
  for (double c : v) {
    const double r = c / scale;
    acc += r * r;
  }
  return scale * std::sqrt(acc);
}

inline bool all_finite(std::span<const double> v) {
  for (double c : v)
    if (!std::isfinite(c)) return false;
  return true;
}

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace vsr
