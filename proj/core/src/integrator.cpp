#include "vsr/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vsr/errors.hpp"

namespace vsr {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// Difference between 5th and embedded 4th order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

class Stepper {
 public:
  Stepper(const OdeRhs& rhs, std::size_t n, const IntegratorOptions& opts)
      : rhs_(rhs), opts_(opts), k1_(n), k2_(n), k3_(n), k4_(n), k5_(n),
        k6_(n), k7_(n), tmp_(n), ynew_(n) {}

  void advance(double& t, Vec& y, double t_target, IntegrationStats& stats) {
    const std::size_t n = y.size();
    if (t_target <= t) return;
    if (!have_k1_) {
      rhs_(t, y, k1_);
      have_k1_ = true;
      if (h_ <= 0.0) h_ = initial_step(t, y, t_target - t);
    }
    std::size_t steps = 0;
    while (t < t_target) {
      if (++steps > opts_.max_steps)
        throw FiniteEscape("integrator exceeded max_steps", t);
      const double min_step = opts_.min_step_rel * std::max(1.0, std::fabs(t));
      if (h_ < min_step) throw FiniteEscape("step size underflow", t);

      bool last = false;
      double h = h_;
      if (t + h >= t_target) {
        h = t_target - t;
        last = true;
      }

      for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * a21 * k1_[i];
      rhs_(t + c2 * h, tmp_, k2_);
      for (std::size_t i = 0; i < n; ++i)
        tmp_[i] = y[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
      rhs_(t + c3 * h, tmp_, k3_);
      for (std::size_t i = 0; i < n; ++i)
        tmp_[i] = y[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
      rhs_(t + c4 * h, tmp_, k4_);
      for (std::size_t i = 0; i < n; ++i)
        tmp_[i] = y[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] +
                              a54 * k4_[i]);
      rhs_(t + c5 * h, tmp_, k5_);
      for (std::size_t i = 0; i < n; ++i)
        tmp_[i] = y[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] +
                              a64 * k4_[i] + a65 * k5_[i]);
      rhs_(t + h, tmp_, k6_);
      for (std::size_t i = 0; i < n; ++i)
        ynew_[i] = y[i] + h * (b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] +
                               b5 * k5_[i] + b6 * k6_[i]);
      rhs_(t + h, ynew_, k7_);

      double err = 0.0;
      bool finite = true;
      for (std::size_t i = 0; i < n; ++i) {
        const double ei = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] +
                               e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
        const double sc =
            opts_.atol + opts_.rtol * std::max(std::fabs(y[i]), std::fabs(ynew_[i]));
        const double r = ei / sc;
        err += r * r;
        if (!std::isfinite(ynew_[i]) || !std::isfinite(ei)) finite = false;
      }
      err = n > 0 ? std::sqrt(err / static_cast<double>(n)) : 0.0;

      if (!finite) {
        ++stats.rejected;
        h_ = 0.25 * h;
        continue;
      }
      if (err <= 1.0) {
        ++stats.accepted;
        t = last ? t_target : t + h;
        std::swap(y, ynew_);
        std::swap(k1_, k7_);  // FSAL
        if (norm(y) > opts_.state_cap)
          throw FiniteEscape("state norm exceeded cap", t);
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        // Do not let a short landing step shrink the working step size.
        if (!last) h_ = h * fac;
        else h_ = std::max(h_, h * fac);
      } else {
        ++stats.rejected;
        h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
      }
    }
  }

 private:
  double initial_step(double t, const Vec& y, double span) {
    const double d0 = norm(y);
    const double d1 = norm(k1_);
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, span);
    // One explicit Euler probe to gauge the second derivative.
    for (std::size_t i = 0; i < y.size(); ++i) tmp_[i] = y[i] + h * k1_[i];
    rhs_(t + h, tmp_, k2_);
    for (std::size_t i = 0; i < y.size(); ++i) k3_[i] = k2_[i] - k1_[i];
    const double d2 = norm(k3_) / h;
    const double scale = opts_.atol + opts_.rtol * d0;
    double h1;
    if (std::max(d1, d2) <= 1e-15)
      h1 = std::max(1e-6, h * 1e-3);
    else
      h1 = std::pow(0.01 * scale / std::max(d1, d2), 0.2);
    return std::max(std::min({100 * h, h1, span}), opts_.min_step_rel * 10);
  }

  const OdeRhs& rhs_;
  const IntegratorOptions& opts_;
  Vec k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_;
  bool have_k1_ = false;
  double h_ = 0.0;
};

}  // namespace

std::vector<Vec> integrate_dopri5(const OdeRhs& rhs, Vec y0,
                                  std::span<const double> t_out,
                                  const IntegratorOptions& opts,
                                  IntegrationStats* stats) {
  IntegrationStats local;
  IntegrationStats& st = stats ? *stats : local;
  std::vector<Vec> out;
  out.reserve(t_out.size());
  Stepper stepper(rhs, y0.size(), opts);
  double t = 0.0;
  Vec y = std::move(y0);
  for (double target : t_out) {
    if (target < t)
      throw InvalidSpec("output times must be nondecreasing and nonnegative");
    stepper.advance(t, y, target, st);
    out.push_back(y);
  }
  return out;
}

Vec integrate_dopri5(const OdeRhs& rhs, Vec y0, double t_end,
                     const IntegratorOptions& opts, IntegrationStats* stats) {
  const double ts[1] = {t_end};
  return std::move(integrate_dopri5(rhs, std::move(y0), ts, opts, stats).front());
}

}  // namespace vsr
