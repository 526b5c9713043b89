#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vsr/comparison.hpp"
#include "vsr/grid.hpp"
#include "vsr/linalg.hpp"
#include "vsr/models.hpp"

namespace vsr {

/// V : R^n -> [0, inf]; +inf is a legal value.
using LyapunovFn = std::function<double(std::span<const double> x)>;

/// Parses V over `s` (= |x|) and x1..xn.
LyapunovFn parse_lyapunov(std::string_view text, std::size_t state_dim);

struct LyapunovCandidate {
  LyapunovFn V;
  std::string V_text;
  ComparisonFn alpha1;
  ComparisonFn alpha2;
  ComparisonFn alpha3;
  /// Dead-zone gain; only used by the input-to-state mode.
  std::optional<ComparisonFn> rho;
  double M = 1.0;
  /// E (measurement-error bound) or D (disturbance bound), per mode.
  double bound = 0.0;
};

enum class Verdict { CertifiedOnGrid, ViolatedAt, Inconclusive };

std::string_view to_string(Verdict v);

struct Witness {
  Vec x;
  Vec e;
  double T = 0.0;
};

struct GridStats {
  std::size_t x_points = 0;
  std::size_t e_points = 0;
  std::size_t t_points = 0;
  /// (x, e, T) triples actually evaluated.
  std::size_t evaluated = 0;
  /// Pairs skipped by the rho(|e|) <= |x| restriction.
  std::size_t excluded_by_region = 0;
  std::size_t inconclusive = 0;
  std::size_t failed_evaluations = 0;
  double x_cell_radius = 0.0;
  double e_cell_radius = 0.0;
  double t_spacing = 0.0;
};

struct CertificationReport {
  Verdict verdict = Verdict::Inconclusive;
  double min_margin = 0.0;
  std::optional<Witness> witness;
  GridStats grid;
  /// Bound on the sampling periods examined.
  double T_used = 0.0;
  std::vector<std::string> caveats;
  std::optional<double> T_max_certified;
  /// Set when a Lipschitz constant was supplied: whether the grid margin
  /// dominates L times the joint cell half-diagonal.
  std::optional<bool> lipschitz_rigorous;
};

/// Checks alpha1(|x|) <= V(x) and V(x) <= alpha2(|x|) on the grid of {|x| <= M}.
CertificationReport check_sandwich(const LyapunovCandidate& cand,
                                   std::size_t state_dim,
                                   const BallGridSpec& x_grid = {});

enum class DecreaseMode {
  /// V(Fbar(x,d,T)) - V(x) <= -T alpha3(|x|) on |x| <= M, |d| <= D.
  RobustStability,
  /// Same, restricted to rho(|e|) <= |x| <= M, |e| <= E.
  InputToState,
};

std::string_view to_string(DecreaseMode m);

struct DecreaseGrid {
  BallGridSpec x;
  BallGridSpec e;
  /// Periods T_j = T_bound * j / (t_points + 1), j = 1..t_points.
  std::size_t t_points = 32;
  unsigned workers = 1;
  /// Lipschitz constant of (x, e, T) -> V(Fbar) - V(x) + T alpha3(|x|).
  std::optional<double> lipschitz;
};

/// Margin -[V(Fbar(x,e,T)) - V(x) + T alpha3(|x|)] at a single point.
/// NaN when V(x) is infinite (undecidable); -inf when the model escapes.
double decrease_margin(const ClosedLoopModel& model,
                       const LyapunovCandidate& cand, std::span<const double> x,
                       std::span<const double> e, double T);

CertificationReport certify_decrease(const ClosedLoopModel& model,
                                     const LyapunovCandidate& cand,
                                     DecreaseMode mode, double T_bound,
                                     const DecreaseGrid& grid = {});

/// Same sweep over an explicit list of periods.
CertificationReport certify_decrease_at(const ClosedLoopModel& model,
                                        const LyapunovCandidate& cand,
                                        DecreaseMode mode,
                                        std::span<const double> periods,
                                        const DecreaseGrid& grid = {});

struct PeriodScan {
  double T_hi = 1.0;
  std::size_t coarse = 32;
  double refine_tol = 1e-4;
};

struct MaxPeriodResult {
  double T_max_certified = 0.0;
  CertificationReport report;
};

/// Largest T such that every scanned period in (0, T] certifies. Throws
/// NoneCertified when the smallest coarse period already fails.
MaxPeriodResult max_sampling_period(const ClosedLoopModel& model,
                                    const LyapunovCandidate& cand,
                                    DecreaseMode mode, const PeriodScan& scan,
                                    const DecreaseGrid& grid = {});

struct StructuralSpec {
  double T_probe = 0.05;
  std::size_t t_points = 32;
  std::vector<double> eps_grid{0.01, 0.05, 0.1, 0.5, 1.0};
  std::vector<double> delta_candidates;  // empty: geometric 1e-4 .. 1
  std::vector<double> M_grid{0.5, 1.0, 2.0};
  std::vector<double> E_grid{0.0, 0.05, 0.1};
  std::size_t points_per_axis = 41;
  std::size_t lhs_samples = 2048;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double origin_atol = 1e-12;
};

struct DeltaEntry {
  double eps;
  std::optional<double> delta;  // absent: no candidate qualifies
  double sup;                   // sup |Fbar| at the chosen delta (0 if absent)
};

struct BoundEntry {
  double M;
  double E;
  double C;
};

struct StructuralReport {
  double origin_residual = 0.0;
  double T_probe = 0.0;
  std::vector<DeltaEntry> delta_table;
  std::vector<BoundEntry> C_table;
  bool delta_monotone = true;
  bool C_monotone = true;
  std::vector<std::string> caveats;
};

/// Origin fixed point, continuity at the origin as a delta(eps) table and
/// boundedness as a C(M, E) table, all as grid suprema of |Fbar| over
/// T in (0, T_probe). Throws OriginNotFixed.
StructuralReport check_structural(const ClosedLoopModel& model,
                                  const StructuralSpec& spec);

}  // namespace vsr
