#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vsr/linalg.hpp"
#include "vsr/models.hpp"
#include "vsr/random.hpp"

namespace vsr {

enum class SamplingMode { Constant, IIDUniform, Explicit };

/// A finite prefix of a sequence in Phi(T_max): every period in (0, T_max).
struct SamplingSpec {
  SamplingMode mode = SamplingMode::IIDUniform;
  /// Constant mode: every period equals theta * T_max, theta in (0, 1).
  double theta = 0.5;
  double T_max = 0.1;
  std::size_t length = 100;
  std::uint64_t seed = 0;
  std::vector<double> periods;  // Explicit mode
};

/// Random modes draw from [T_max * 1e-9, T_max * (1 - 1e-9)] so the open
/// interval is respected. `index` selects an independent scenario stream.
/// Throws InvalidSpec.
std::vector<double> gen_sampling(const SamplingSpec& spec, std::uint64_t index = 0);

enum class ErrorMode { Zero, ConstantVector, IIDBall, IIDSphere, WorstCaseList };

/// Error or disturbance sequence with |e_i| <= bound.
struct ErrorSpec {
  ErrorMode mode = ErrorMode::Zero;
  double bound = 0.0;
  std::size_t dim = 1;
  std::size_t length = 100;
  std::uint64_t seed = 0;
  Vec constant;             // ConstantVector mode
  std::vector<Vec> values;  // WorstCaseList mode
};

std::vector<Vec> gen_errors(const ErrorSpec& spec, std::uint64_t index = 0);

/// Uniform draw from the ball (or its boundary sphere) of given radius.
Vec sample_ball(std::size_t dim, double radius, bool on_sphere,
                std::uint64_t seed, RngStream stream, std::uint64_t index);

struct Trajectory {
  std::vector<Vec> states;      // x_0 .. x_K (truncated at divergence)
  std::vector<double> periods;  // T_0 .. T_{K-1}
  std::vector<Vec> errors;      // e_0 .. e_{K-1}
  std::vector<double> elapsed;  // elapsed[k] = T_0 + ... + T_{k-1}, one per state
  /// Index of the first state that could not be produced (escape, non-finite
  /// or above the cap); equals states.size() when set.
  std::optional<std::size_t> diverged_at;
  std::string divergence_reason;
};

/// Iterates x_{k+1} = Fbar(x_k, e_k, T_k). Divergence is recorded, not thrown.
Trajectory simulate(const ClosedLoopModel& model, std::span<const double> x0,
                    std::span<const double> periods, std::span<const Vec> errors,
                    double state_cap = 1e9);

/// CSV with header `k,t,x1..xn,e1..eq,T`; the last row carries the final
/// state only. A trailing `# diverged_at=<k>` line marks divergence.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          std::size_t state_dim, std::size_t error_dim);

enum class InitialMode { Ball, Sphere, Alternating };

/// Recipe for ensembles of scenarios; scenario i is reproducible from
/// (seed, i) alone.
struct EnsembleSpec {
  std::size_t scenarios = 100;
  double x0_radius = 1.0;
  InitialMode x0_mode = InitialMode::Ball;
  SamplingSpec sampling;
  ErrorSpec errors;
  std::uint64_t seed = 0;
};

struct Scenario {
  Vec x0;
  std::vector<double> periods;
  std::vector<Vec> errors;
};

Scenario make_scenario(const EnsembleSpec& spec, std::size_t state_dim,
                       std::uint64_t index);

std::vector<Trajectory> simulate_ensemble(const ClosedLoopModel& model,
                                          const EnsembleSpec& spec,
                                          unsigned workers = 1);

}  // namespace vsr
