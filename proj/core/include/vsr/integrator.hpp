#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "vsr/linalg.hpp"

namespace vsr {

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  /// FiniteEscape is raised once |y| exceeds this cap.
  double state_cap = 1e9;
  /// Steps shorter than this (relative to max(1, |t|)) count as underflow.
  double min_step_rel = 1e-14;
  std::size_t max_steps = 2'000'000;
};

/// dy/dt = rhs(t, y); writes into `dydt` (same size as `y`).
using OdeRhs =
    std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// Dormand-Prince 5(4) with embedded error control, integrating from t = 0
/// and landing exactly on every requested output time (which must be
/// nondecreasing and nonnegative). Throws FiniteEscape on blow-up, non-finite
/// states or step-size underflow.
std::vector<Vec> integrate_dopri5(const OdeRhs& rhs, Vec y0,
                                  std::span<const double> t_out,
                                  const IntegratorOptions& opts,
                                  IntegrationStats* stats = nullptr);

Vec integrate_dopri5(const OdeRhs& rhs, Vec y0, double t_end,
                     const IntegratorOptions& opts,
                     IntegrationStats* stats = nullptr);

}  // namespace vsr
