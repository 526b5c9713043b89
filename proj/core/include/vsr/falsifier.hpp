#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>

#include "vsr/certifier.hpp"
#include "vsr/comparison.hpp"
#include "vsr/models.hpp"
#include "vsr/trajectory.hpp"

namespace vsr {

/// |x_k| <= beta(|x0|, elapsed_k) + gamma(sup_{i<k} |e_i|) + R for |x0| <= M0,
/// |e_i| <= E0 and periods in (0, T_bound).
struct EnvelopeClaim {
  KLFn beta;
  std::optional<ComparisonFn> gamma;
  double R = 0.0;
  double M0 = 1.0;
  double E0 = 0.0;
  double T_bound = 0.1;
};

/// The decrease inequality of `cand` for periods in (0, T_bound).
struct DecreaseClaim {
  LyapunovCandidate cand;
  DecreaseMode mode = DecreaseMode::RobustStability;
  double T_bound = 0.1;
};

using Claim = std::variant<EnvelopeClaim, DecreaseClaim>;

struct SearchBudget {
  std::size_t restarts = 1000;
  std::size_t local_iterations = 200;
  std::size_t horizon = 200;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

/// Worst point of one scenario: score = lhs - rhs (envelope), or
/// V(Fbar) - V + T alpha3 (decrease, where lhs = V(Fbar) - V, rhs = -T alpha3).
/// A state that could not be produced counts as lhs = +inf.
struct ScenarioScore {
  std::size_t k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double score = -std::numeric_limits<double>::infinity();
  bool violated = false;
};

struct Counterexample {
  Scenario scenario;
  ScenarioScore violation;
  /// Restart the search started from.
  std::size_t restart = 0;
  /// Hill-climbing iterations spent before the violation appeared.
  std::size_t local_steps = 0;
};

struct FalsificationResult {
  std::optional<Counterexample> witness;
  /// Largest score seen (> 0 only with a witness).
  double best_score = -std::numeric_limits<double>::infinity();
  std::size_t scenarios_evaluated = 0;
};

/// Scores a scenario against a claim; `violated` means score > tol * (1 + |rhs|).
ScenarioScore replay(const ClosedLoopModel& model, const Claim& claim,
                     const Scenario& scenario, double rel_tol = 1e-12);

/// Random restarts followed by coordinate hill climbing on the best one.
/// Results depend on (seed, budget) only, never on the worker count.
FalsificationResult falsify(const ClosedLoopModel& model, const Claim& claim,
                            const SearchBudget& budget = {});

}  // namespace vsr
