#include "vsr/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "vsr/errors.hpp"
#include "vsr/integrator.hpp"

namespace vsr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxBisection = 200;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}
}  // namespace

class ComparisonFn::Impl {
 public:
  Impl(ClassKind kind, double hint, bool hard)
      : kind_(kind), hint_(hint), hard_(hard) {}
  virtual ~Impl() = default;

  virtual double eval(double s) const = 0;
  virtual std::optional<double> exact_inverse(double) const {
    return std::nullopt;
  }
  virtual bool extrapolated_at(double) const { return false; }
  virtual std::string describe() const = 0;

  ClassKind kind() const { return kind_; }
  double hint() const { return hint_; }
  bool hard() const { return hard_; }

 private:
  ClassKind kind_;
  double hint_;
  bool hard_;
};

namespace {

using Impl = ComparisonFn::Impl;

class PowerImpl final : public Impl {
 public:
  PowerImpl(double coef, double exponent, double hint = 1e6)
      : Impl(ClassKind::KInfinity, hint, false), coef_(coef), exp_(exponent) {
    if (!(coef > 0.0) || !(exponent > 0.0))
      throw InvalidSpec("power comparison function needs coef > 0, exponent > 0");
  }
  double eval(double s) const override {
    if (exp_ == 1.0) return coef_ * s;
    if (exp_ == 2.0) return coef_ * s * s;
    return coef_ * std::pow(s, exp_);
  }
  std::optional<double> exact_inverse(double y) const override {
    if (exp_ == 1.0) return y / coef_;
    if (exp_ == 2.0) return std::sqrt(y / coef_);
    return std::pow(y / coef_, 1.0 / exp_);
  }
  std::string describe() const override {
    return fmt(coef_) + "*pow(s," + fmt(exp_) + ")";
  }

 private:
  double coef_;
  double exp_;
};

class ExprImpl final : public Impl {
 public:
  ExprImpl(Expression e, ClassKind kind, double hint)
      : Impl(kind, hint, false), expr_(std::move(e)) {
    if (auto m = expr_.as_monomial(); m && m->coef > 0.0 && m->exponent > 0.0)
      mono_ = *m;
  }
  double eval(double s) const override {
    const double v[1] = {s};
    return expr_.eval(v);
  }
  std::optional<double> exact_inverse(double y) const override {
    if (!mono_) return std::nullopt;
    if (mono_->exponent == 1.0) return y / mono_->coef;
    if (mono_->exponent == 2.0) return std::sqrt(y / mono_->coef);
    return std::pow(y / mono_->coef, 1.0 / mono_->exponent);
  }
  std::string describe() const override { return expr_.text(); }

 private:
  Expression expr_;
  std::optional<Expression::Monomial> mono_;
};

class TableImpl final : public Impl {
 public:
  TableImpl(std::vector<double> s, std::vector<double> f, ClassKind kind,
            Extrapolation ex)
      : Impl(kind, s.back(), ex == Extrapolation::None),
        s_(std::move(s)), f_(std::move(f)), ex_(ex) {}

  double eval(double s) const override {
    if (s > s_.back()) {
      if (ex_ == Extrapolation::None)
        throw DomainExceeded("table comparison function evaluated at " +
                             fmt(s) + " beyond last knot " + fmt(s_.back()));
      const std::size_t n = s_.size();
      const double slope = (f_[n - 1] - f_[n - 2]) / (s_[n - 1] - s_[n - 2]);
      return f_[n - 1] + slope * (s - s_[n - 1]);
    }
    const auto it = std::upper_bound(s_.begin(), s_.end(), s);
    if (it == s_.end()) return f_.back();
    const std::size_t i = static_cast<std::size_t>(it - s_.begin());
    const double w = (s - s_[i - 1]) / (s_[i] - s_[i - 1]);
    return f_[i - 1] + w * (f_[i] - f_[i - 1]);
  }

  std::optional<double> exact_inverse(double y) const override {
    if (y > f_.back()) {
      if (ex_ == Extrapolation::None) return std::nullopt;
      const std::size_t n = s_.size();
      const double slope = (f_[n - 1] - f_[n - 2]) / (s_[n - 1] - s_[n - 2]);
      return s_[n - 1] + (y - f_[n - 1]) / slope;
    }
    const auto it = std::upper_bound(f_.begin(), f_.end(), y);
    if (it == f_.end()) return s_.back();
    const std::size_t i = static_cast<std::size_t>(it - f_.begin());
    const double w = (y - f_[i - 1]) / (f_[i] - f_[i - 1]);
    return s_[i - 1] + w * (s_[i] - s_[i - 1]);
  }

  bool extrapolated_at(double s) const override {
    return ex_ == Extrapolation::Linear && s > s_.back();
  }

  std::string describe() const override {
    return "table(" + std::to_string(s_.size()) + " knots, s<=" +
           fmt(s_.back()) + (ex_ == Extrapolation::Linear ? ", linear tail)" : ")");
  }

 private:
  std::vector<double> s_;
  std::vector<double> f_;
  Extrapolation ex_;
};

class ComposedImpl final : public Impl {
 public:
  ComposedImpl(ComparisonFn outer, ComparisonFn inner, double hint)
      : Impl(outer.kind() == ClassKind::KInfinity &&
                     inner.kind() == ClassKind::KInfinity
                 ? ClassKind::KInfinity
                 : ClassKind::K,
             hint, inner.impl().hard()),
        outer_(std::move(outer)), inner_(std::move(inner)) {}

  double eval(double s) const override {
    return outer_.impl().eval(inner_.impl().eval(s));
  }
  std::optional<double> exact_inverse(double y) const override {
    auto a = outer_.impl().exact_inverse(y);
    if (!a) return std::nullopt;
    return inner_.impl().exact_inverse(*a);
  }
  bool extrapolated_at(double s) const override {
    return inner_.extrapolated_at(s) ||
           outer_.extrapolated_at(inner_.impl().eval(s));
  }
  std::string describe() const override {
    return "(" + outer_.describe() + ")o(" + inner_.describe() + ")";
  }

 private:
  ComparisonFn outer_;
  ComparisonFn inner_;
};

class InverseImpl final : public Impl {
 public:
  explicit InverseImpl(ComparisonFn f)
      : Impl(f.kind(), f.impl().eval(f.domain_hint()), f.impl().hard()),
        f_(std::move(f)) {}
  double eval(double y) const override { return invert_k(f_, y); }
  std::optional<double> exact_inverse(double s) const override {
    return f_.impl().eval(s);
  }
  bool extrapolated_at(double y) const override {
    return f_.extrapolated_at(eval(y));
  }
  std::string describe() const override { return "inv(" + f_.describe() + ")"; }

 private:
  ComparisonFn f_;
};

class ScaledImpl final : public Impl {
 public:
  ScaledImpl(double c, ComparisonFn f)
      : Impl(f.kind(), f.domain_hint(), f.impl().hard()), c_(c), f_(std::move(f)) {}
  double eval(double s) const override { return c_ * f_.impl().eval(s); }
  std::optional<double> exact_inverse(double y) const override {
    return f_.impl().exact_inverse(y / c_);
  }
  bool extrapolated_at(double s) const override { return f_.extrapolated_at(s); }
  std::string describe() const override {
    return fmt(c_) + "*(" + f_.describe() + ")";
  }

 private:
  double c_;
  ComparisonFn f_;
};

class MaxImpl final : public Impl {
 public:
  MaxImpl(ComparisonFn a, ComparisonFn b)
      : Impl(a.kind() == ClassKind::KInfinity || b.kind() == ClassKind::KInfinity
                 ? ClassKind::KInfinity
                 : ClassKind::K,
             std::min(a.domain_hint(), b.domain_hint()),
             a.impl().hard() || b.impl().hard()),
        a_(std::move(a)), b_(std::move(b)) {}
  double eval(double s) const override {
    return std::fmax(a_.impl().eval(s), b_.impl().eval(s));
  }
  bool extrapolated_at(double s) const override {
    return a_.extrapolated_at(s) || b_.extrapolated_at(s);
  }
  std::string describe() const override {
    return "max(" + a_.describe() + ", " + b_.describe() + ")";
  }

 private:
  ComparisonFn a_;
  ComparisonFn b_;
};

}  // namespace

ComparisonFn::ComparisonFn() : impl_(std::make_shared<PowerImpl>(1.0, 1.0)) {}

ComparisonFn ComparisonFn::from_expression(std::string_view text,
                                           ClassKind kind, double domain_hint) {
  return ComparisonFn(std::make_shared<ExprImpl>(
      Expression::parse(text, {"s"}), kind, domain_hint));
}

ComparisonFn ComparisonFn::table(std::vector<double> s, std::vector<double> f,
                                 ClassKind kind, Extrapolation extrapolation) {
  if (s.size() != f.size() || s.empty())
    throw InvalidSpec("table needs equally many (nonzero) s and f knots");
  if (s.front() != 0.0) {
    if (s.front() < 0.0) throw InvalidSpec("table knots must be nonnegative");
    s.insert(s.begin(), 0.0);
    f.insert(f.begin(), 0.0);
  }
  if (f.front() != 0.0) throw InvalidSpec("table must satisfy f(0) = 0");
  if (s.size() < 2) throw InvalidSpec("table needs at least one positive knot");
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i] > s[i - 1]) || !(f[i] > f[i - 1]))
      throw InvalidSpec("table knots must be strictly increasing in s and f");
  }
  return ComparisonFn(std::make_shared<TableImpl>(std::move(s), std::move(f),
                                                  kind, extrapolation));
}

ComparisonFn ComparisonFn::identity() { return ComparisonFn(); }

ComparisonFn ComparisonFn::power(double coef, double exponent) {
  return ComparisonFn(std::make_shared<PowerImpl>(coef, exponent));
}

double ComparisonFn::operator()(double s) const { return eval_k(*this, s); }
ClassKind ComparisonFn::kind() const { return impl_->kind(); }
double ComparisonFn::domain_hint() const { return impl_->hint(); }
bool ComparisonFn::extrapolated_at(double s) const {
  return impl_->extrapolated_at(s);
}
std::string ComparisonFn::describe() const { return impl_->describe(); }

double eval_k(const ComparisonFn& f, double s) {
  if (!(s >= 0.0))
    throw std::invalid_argument("comparison function argument must be >= 0, got " +
                                fmt(s));
  if (s == 0.0) return 0.0;
  return f.impl().eval(s);
}

double invert_k(const ComparisonFn& f, double y) {
  if (!(y >= 0.0))
    throw std::invalid_argument("inverse argument must be >= 0, got " + fmt(y));
  if (y == 0.0) return 0.0;
  const Impl& impl = f.impl();
  if (auto exact = impl.exact_inverse(y)) {
    // Nudge up past rounding so that f(result) >= y, matching bisection.
    double r = *exact;
    for (int i = 0; i < 4 && impl.eval(r) < y; ++i) r = std::nextafter(r, kInf);
    return r;
  }

  const double hint = impl.hint();
  double lo = 0.0;
  double hi = std::min(1.0, hint);
  while (impl.eval(hi) < y) {
    if (hi >= hint)
      throw RangeExceeded("value " + fmt(y) + " above f(domain_hint) for " +
                          impl.describe());
    lo = hi;
    hi = std::min(2.0 * hi, hint);
    if (!std::isfinite(hi))
      throw RangeExceeded("value " + fmt(y) + " not attained by " + impl.describe());
  }
  for (int it = 0; it < kMaxBisection; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double fm = impl.eval(mid);
    if (fm == y) return mid;
    if (fm < y)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  return hi;
}

ComparisonFn compose_k(const ComparisonFn& outer, const ComparisonFn& inner) {
  const double inner_hint = inner.domain_hint();
  const double reach = inner.impl().eval(inner_hint);
  double hint = inner_hint;
  if (reach > outer.domain_hint()) {
    if (outer.impl().hard())
      throw DomainMismatch("inner range " + fmt(reach) +
                           " exceeds hard domain " + fmt(outer.domain_hint()) +
                           " of " + outer.describe());
    hint = invert_k(inner, outer.domain_hint());
  }
  return ComparisonFn(std::make_shared<ComposedImpl>(outer, inner, hint));
}

ComparisonFn inverse_k(const ComparisonFn& f) {
  return ComparisonFn(std::make_shared<InverseImpl>(f));
}

ComparisonFn scale_k(double c, const ComparisonFn& f) {
  if (!(c > 0.0)) throw InvalidSpec("scale factor must be positive");
  return ComparisonFn(std::make_shared<ScaledImpl>(c, f));
}

ComparisonFn max_k(const ComparisonFn& a, const ComparisonFn& b) {
  return ComparisonFn(std::make_shared<MaxImpl>(a, b));
}

std::optional<std::string> check_class_k(const ComparisonFn& f,
                                         std::span<const double> samples) {
  const double f0 = f.impl().eval(0.0);
  if (f0 != 0.0) return "f(0) = " + fmt(f0) + " != 0";
  double prev_s = -1.0;
  double prev_f = -kInf;
  for (double s : samples) {
    const double v = f.impl().eval(s);
    if (!std::isfinite(v)) return "f(" + fmt(s) + ") not finite";
    if (prev_s >= 0.0 && s > prev_s && !(v > prev_f))
      return "not strictly increasing between s=" + fmt(prev_s) +
             " and s=" + fmt(s);
    prev_s = s;
    prev_f = v;
  }
  return std::nullopt;
}

std::vector<double> comparison_flow(const ComparisonFn& alpha, double s,
                                    std::span<const double> ts,
                                    const FlowOptions& options) {
  if (!(s >= 0.0)) throw std::invalid_argument("flow start must be >= 0");
  if (s == 0.0) return std::vector<double>(ts.size(), 0.0);
  IntegratorOptions io;
  io.rtol = options.rtol;
  io.atol = options.atol;
  io.state_cap = kInf;
  const Impl& a = alpha.impl();
  OdeRhs rhs = [&a](double, std::span<const double> y, std::span<double> dy) {
    const double v = y[0] > 0.0 ? y[0] : 0.0;
    dy[0] = v > 0.0 ? -a.eval(v) : 0.0;
  };
  const auto states = integrate_dopri5(rhs, Vec{s}, ts, io);
  std::vector<double> out(states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
    out[i] = std::clamp(states[i][0], 0.0, s);
  return out;
}

struct KLFn::Flow {
  ComparisonFn rate;
  ComparisonFn inner;
  ComparisonFn outer;
  double scale;
  FlowOptions options;
};

KLFn KLFn::from_expression(std::string_view text) {
  KLFn k;
  k.expr_ = std::make_shared<const Expression>(Expression::parse(text, {"s", "t"}));
  return k;
}

KLFn KLFn::from_flow(ComparisonFn rate, ComparisonFn inner, ComparisonFn outer,
                     double scale, FlowOptions options) {
  if (!(scale > 0.0)) throw InvalidSpec("flow scale must be positive");
  KLFn k;
  k.flow_ = std::make_shared<const Flow>(
      Flow{std::move(rate), std::move(inner), std::move(outer), scale, options});
  return k;
}

double KLFn::operator()(double s, double t) const {
  const double ts[1] = {t};
  return eval_along(s, ts).front();
}

std::vector<double> KLFn::eval_along(double s, std::span<const double> ts) const {
  if (!(s >= 0.0)) throw std::invalid_argument("KL argument s must be >= 0");
  std::vector<double> out(ts.size());
  if (expr_) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double v[2] = {s, ts[i]};
      out[i] = s == 0.0 ? 0.0 : expr_->eval(v);
    }
    return out;
  }
  const Flow& f = *flow_;
  const auto ys = comparison_flow(f.rate, eval_k(f.inner, s), ts, f.options);
  for (std::size_t i = 0; i < ys.size(); ++i)
    out[i] = invert_k(f.outer, f.scale * ys[i]);
  return out;
}

std::string KLFn::describe() const {
  if (expr_) return expr_->text();
  const Flow& f = *flow_;
  return "inv(" + f.outer.describe() + ")(" + fmt(f.scale) + "*flow[" +
         f.rate.describe() + "](" + f.inner.describe() + "(s), t))";
}

std::optional<std::string> check_class_kl(const KLFn& beta,
                                          std::span<const double> s_samples,
                                          std::span<const double> t_samples) {
  std::vector<std::vector<double>> grid;
  grid.reserve(s_samples.size());
  for (double s : s_samples) grid.push_back(beta.eval_along(s, t_samples));
  for (std::size_t j = 0; j < t_samples.size(); ++j) {
    for (std::size_t i = 1; i < s_samples.size(); ++i) {
      if (s_samples[i] > s_samples[i - 1] && !(grid[i][j] > grid[i - 1][j]))
        return "beta(., " + fmt(t_samples[j]) + ") not increasing at s=" +
               fmt(s_samples[i]);
    }
  }
  for (std::size_t i = 0; i < s_samples.size(); ++i) {
    if (s_samples[i] == 0.0) continue;
    for (std::size_t j = 1; j < t_samples.size(); ++j) {
      if (t_samples[j] > t_samples[j - 1] && !(grid[i][j] < grid[i][j - 1]))
        return "beta(" + fmt(s_samples[i]) + ", .) not decreasing at t=" +
               fmt(t_samples[j]);
    }
  }
  return std::nullopt;
}

}  // namespace vsr
