#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vsr/expression.hpp"

namespace vsr {

enum class ClassKind { K, KInfinity };

enum class Extrapolation { None, Linear };

/// A class-K or class-K-infinity function s -> f(s) on [0, inf).
///
/// Values are immutable and cheap to copy (shared representation). Closed
/// forms are kept exact where available; tables are strictly increasing
/// piecewise-linear interpolants anchored at (0, 0). Derived functions
/// (compositions, inverses, scalings, pointwise maxima) keep references to
/// their operands.
class ComparisonFn {
 public:
  class Impl;

  /// Default: the identity s -> s.
  ComparisonFn();

  /// Closed form in the variable `s`, e.g. "3*pow(s,4)+pow(s,2)".
  static ComparisonFn from_expression(std::string_view text,
                                      ClassKind kind = ClassKind::KInfinity,
                                      double domain_hint = 1e6);
  /// Knots (s_i, f_i); a missing (0, 0) knot is prepended. Throws InvalidSpec
  /// unless both columns are strictly increasing and f(0) = 0.
  static ComparisonFn table(std::vector<double> s, std::vector<double> f,
                            ClassKind kind = ClassKind::KInfinity,
                            Extrapolation extrapolation = Extrapolation::Linear);
  static ComparisonFn identity();
  /// coef * s^exponent with exact inverse.
  static ComparisonFn power(double coef, double exponent);

  double operator()(double s) const;
  ClassKind kind() const;
  /// Upper end of the validated domain. For tables without extrapolation it
  /// is a hard limit; for closed forms it is advisory.
  double domain_hint() const;
  /// True when `s` lies beyond the last knot of an extrapolating table
  /// somewhere in the representation.
  bool extrapolated_at(double s) const;
  std::string describe() const;

  const Impl& impl() const { return *impl_; }
  explicit ComparisonFn(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<const Impl> impl_;
};

/// Evaluates f(s). Throws std::invalid_argument for s < 0 and DomainExceeded
/// for s beyond a non-extrapolating table.
double eval_k(const ComparisonFn& f, double s);

/// Returns s with f(s) = y, by bisection unless an exact inverse is known.
/// The bracket end with f(s) >= y is returned, so the result never
/// underestimates the true preimage. Throws RangeExceeded if y > f(domain_hint).
double invert_k(const ComparisonFn& f, double y);

/// outer(inner(s)). The domain hint shrinks to where inner stays inside
/// outer's validated domain; DomainMismatch if outer is a hard table that
/// inner overruns.
ComparisonFn compose_k(const ComparisonFn& outer, const ComparisonFn& inner);

/// Lazy inverse f^{-1} as a comparison function.
ComparisonFn inverse_k(const ComparisonFn& f);

/// c * f(s), c > 0.
ComparisonFn scale_k(double c, const ComparisonFn& f);

/// s -> max(a(s), b(s)).
ComparisonFn max_k(const ComparisonFn& a, const ComparisonFn& b);

/// Sampled class-K check: f(0) = 0 and strict increase on `samples`
/// (ascending, nonnegative). Returns a description of the first failure.
std::optional<std::string> check_class_k(const ComparisonFn& f,
                                         std::span<const double> samples);

struct FlowOptions {
  double rtol = 1e-11;
  double atol = 1e-15;
};

/// A class-KL function beta(s, t).
///
/// Either a closed form in (s, t), or the comparison-flow form
///   beta(s, t) = outer^{-1}( scale * y(t) ),   dy/dt = -rate(y),  y(0) = inner(s).
class KLFn {
 public:
  static KLFn from_expression(std::string_view text);
  static KLFn from_flow(ComparisonFn rate, ComparisonFn inner,
                        ComparisonFn outer, double scale = 1.0,
                        FlowOptions options = {});

  double operator()(double s, double t) const;

  /// beta(s, t_j) for nondecreasing t_j. Flow forms integrate once along the
  /// whole list instead of once per point.
  std::vector<double> eval_along(double s, std::span<const double> ts) const;

  bool is_flow() const { return flow_ != nullptr; }
  std::string describe() const;

 private:
  struct Flow;
  std::shared_ptr<const Expression> expr_;
  std::shared_ptr<const Flow> flow_;
};

/// y(t_j) for dy/dt = -alpha(y), y(0) = s, one adaptive integration across
/// the nondecreasing times `ts`.
std::vector<double> comparison_flow(const ComparisonFn& alpha, double s,
                                    std::span<const double> ts,
                                    const FlowOptions& options = {});

/// Sampled KL check on an (s, t) grid: class K in s, strictly decreasing in t.
std::optional<std::string> check_class_kl(const KLFn& beta,
                                          std::span<const double> s_samples,
                                          std::span<const double> t_samples);

}  // namespace vsr
