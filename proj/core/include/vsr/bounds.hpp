#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vsr/certifier.hpp"
#include "vsr/comparison.hpp"
#include "vsr/models.hpp"
#include "vsr/trajectory.hpp"

namespace vsr {

/// y(t) for dy/dt = -alpha(y), y(0) = s.
double comparison_ode(const ComparisonFn& alpha, double s, double t,
                      const FlowOptions& options = {});

/// beta(s, t) = alpha1^{-1}( scale * beta1(alpha2(s), t) ) where beta1 is the
/// comparison flow of alpha = alpha3 o alpha2^{-1}. The robust-stability
/// envelope uses scale 1, the input-to-state envelope scale 2.
KLFn beta_from_certificate(const ComparisonFn& alpha1, const ComparisonFn& alpha2,
                           const ComparisonFn& alpha3, double scale = 1.0);

/// alpha3 o alpha2^{-1}
ComparisonFn decrease_rate(const ComparisonFn& alpha2, const ComparisonFn& alpha3);

struct SigmaGrid {
  /// Arguments s of the sigma table; empty selects 24 points on (0, s_max].
  std::vector<double> s_grid;
  double s_max = 1e-3;
  /// Periods are probed on (0, T_bound).
  double T_bound = 0.1;
  std::size_t t_points = 16;
  BallGridSpec x;
  BallGridSpec e;
  unsigned workers = 1;
};

struct SigmaEta {
  std::vector<double> s;
  /// sup |Fbar| over |x| <= rho(s), |e| <= s, T in (0, T_bound).
  std::vector<double> sigma;
  /// Knot values of the increasing envelope zeta (same abscissae as s).
  std::vector<double> zeta_knots;
  ComparisonFn zeta;
  /// max(zeta, rho)
  ComparisonFn eta;
  std::size_t skipped_points = 0;
  std::vector<std::string> caveats;
};

SigmaEta sigma_eta_estimate(const ClosedLoopModel& model, const ComparisonFn& rho,
                            const SigmaGrid& grid = {});

/// Increasing envelope through (0, 0) that dominates the table, assuming the
/// sampled function is nondecreasing between knots; strictly increasing with
/// slope at least 1e-9 and linear beyond the last knot.
std::vector<double> increasing_envelope(std::span<const double> s,
                                        std::span<const double> v);

/// gamma(s) = alpha1^{-1}( 2 alpha2(eta(s)) )
ComparisonFn gamma_from_certificate(const ComparisonFn& alpha1,
                                    const ComparisonFn& alpha2,
                                    const ComparisonFn& eta);

/// Positive root of T = 1 - exp(-2T).
double tbar_threshold();

/// alpha1^{-1}( alpha2( max{M0, eta(E0)} ) ); without eta, alpha1^{-1}(alpha2(M0)).
double inflate_certification_radius(const ComparisonFn& alpha1,
                                    const ComparisonFn& alpha2, double M0,
                                    double E0 = 0.0,
                                    const std::optional<ComparisonFn>& eta = {});

struct ConverseBudget {
  std::size_t horizon = 100;
  std::size_t scenarios = 100;
  std::uint64_t seed = 0;
  /// Periods are drawn iid from (0, T_star).
  double T_star = 0.05;
  /// Disturbances are drawn from the ball of radius D.
  double D = 0.0;
  unsigned workers = 1;
};

/// Lower bound on sup alpha1(|x_k|) exp(2 elapsed_k) over scenarios from xi.
/// Scenario i depends on (seed, i) only, so larger budgets never decrease it.
double converse_lyapunov_estimate(const ClosedLoopModel& model,
                                  const ComparisonFn& alpha1,
                                  std::span<const double> xi,
                                  const ConverseBudget& budget);

struct EnvelopeViolation {
  std::size_t scenario;
  std::size_t k;
  double lhs;
  double rhs;
  double excess;
};

struct EnvelopeOptions {
  /// lhs counts as a violation only beyond rhs + rel_tol * (1 + rhs).
  double rel_tol = 1e-12;
  std::size_t max_reported = 1000;
  unsigned workers = 1;
};

struct EnvelopeReport {
  std::vector<EnvelopeViolation> violations;
  std::size_t violation_count = 0;
  std::size_t checked_points = 0;
  /// Largest lhs - rhs over every checked point (negative: slack everywhere).
  double max_excess = -std::numeric_limits<double>::infinity();
  std::size_t diverged_scenarios = 0;
};

/// |x_k| <= beta(|x0|, elapsed_k) + gamma(sup_{i<k} |e_i|) + R for every state;
/// the supremum over an empty prefix is 0.
EnvelopeReport envelope_check(std::span<const Trajectory> trajectories,
                              const KLFn& beta,
                              const std::optional<ComparisonFn>& gamma,
                              double R = 0.0, const EnvelopeOptions& options = {});

/// The functions of an envelope derived from a certified Lyapunov triple.
struct GainConstruction {
  DecreaseMode mode = DecreaseMode::RobustStability;
  ComparisonFn alpha;
  KLFn beta;
  std::optional<ComparisonFn> gamma;
  std::optional<SigmaEta> sigma;
  double tbar = 0.0;
  /// Requested radii and the inflated certification radius.
  double M0 = 0.0;
  double E0 = 0.0;
  double M = 0.0;
};

/// Robust stability: beta with scale 1, no gamma. Input-to-state: sigma, eta
/// from the model and cand.rho (periods up to sigma_grid.T_bound), beta with
/// scale 2 and gamma from eta.
GainConstruction construct_gains(const ClosedLoopModel& model,
                                 const LyapunovCandidate& cand, DecreaseMode mode,
                                 double M0, double E0,
                                 const SigmaGrid& sigma_grid = {});

struct ProbeSpec {
  double M = 1.0;
  double D = 0.0;
  double T_probe = 0.05;
  std::vector<double> eps_grid{0.01, 0.05, 0.1, 0.5};
  std::vector<double> L_grid{0.5, 1.0, 2.0, 5.0};
  /// Initial radii tried for delta(eps); empty selects 1e-4 .. M geometrically.
  std::vector<double> delta_candidates;
  std::size_t scenarios = 200;
  std::size_t horizon = 200;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct ProbeTables {
  struct Delta {
    double eps;
    std::optional<double> delta;
  };
  struct Bound {
    double L;
    double C;
  };
  struct Attract {
    double eps;
    /// Absent when some scenario is still above eps at the horizon.
    std::optional<double> time;
  };
  std::vector<Delta> delta;
  std::vector<Bound> C;
  std::vector<Attract> attract;
  std::vector<std::string> caveats;
};

/// Empirical delta(eps), C(M, L) and attraction-time tables from random
/// scenarios with x0 alternating between the sphere and the ball, disturbances
/// in the D-ball and iid periods in (0, T_probe).
ProbeTables stability_probe(const ClosedLoopModel& model, const ProbeSpec& spec);

}  // namespace vsr
