#include "vsr/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vsr/errors.hpp"
#include "vsr/grid.hpp"
#include "vsr/integrator.hpp"

namespace vsr {

std::string_view to_string(StepMethod m) {
  switch (m) {
    case StepMethod::Euler: return "euler";
    case StepMethod::RK4: return "rk4";
    case StepMethod::TightIntegration: return "exact";
    case StepMethod::Analytic: return "analytic";
  }
  return "?";
}

namespace {

Vec rk4_step(const VectorField& f, std::span<const double> x,
             std::span<const double> u, double T) {
  const std::size_t n = x.size();
  Vec tmp(n);
  const Vec k1 = f.eval(x, u);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * T * k1[i];
  const Vec k2 = f.eval(tmp, u);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * T * k2[i];
  const Vec k3 = f.eval(tmp, u);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + T * k3[i];
  const Vec k4 = f.eval(tmp, u);
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = x[i] + T / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

}  // namespace

Vec discretize_step(const DiscreteStepMap& step, std::span<const double> x,
                    std::span<const double> u, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("sampling period must be positive");
  if (step.method == StepMethod::Analytic) {
    if (!step.analytic) throw InvalidSpec("analytic step map has no function");
    return step.analytic(x, u, T);
  }
  if (!step.field) throw InvalidSpec("step map has no vector field");
  const VectorField& f = *step.field;
  switch (step.method) {
    case StepMethod::Euler: {
      const Vec dx = f.eval(x, u);
      Vec out(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + T * dx[i];
      return out;
    }
    case StepMethod::RK4:
      return rk4_step(f, x, u, T);
    case StepMethod::TightIntegration: {
      // Per-step control at a tenth of the tolerance keeps the accumulated
      // error over [0, T] below it.
      IntegratorOptions opts;
      opts.rtol = 0.1 * step.tolerance;
      opts.atol = 0.1 * step.tolerance;
      opts.state_cap = step.escape_cap;
      const Vec held(u.begin(), u.end());
      OdeRhs rhs = [&f, &held](double, std::span<const double> y,
                               std::span<double> dy) {
        const Vec v = f.eval(y, held);
        std::copy(v.begin(), v.end(), dy.begin());
      };
      return integrate_dopri5(rhs, Vec(x.begin(), x.end()), T, opts);
    }
    case StepMethod::Analytic:
      break;
  }
  throw InvalidSpec("unknown step method");
}

ClosedLoopModel ClosedLoopModel::composed(DiscreteStepMap step,
                                          Controller controller,
                                          std::string name) {
  ClosedLoopModel m;
  m.n_ = step.field ? step.field->state_dim : 0;
  if (step.field && step.field->input_dim != controller.input_dim)
    throw InvalidSpec("controller output dimension does not match plant input");
  m.q_ = controller.error_dim;
  m.name_ = std::move(name);
  m.step_ = std::move(step);
  m.controller_ = std::move(controller);
  return m;
}

ClosedLoopModel ClosedLoopModel::direct(std::size_t state_dim,
                                        std::size_t error_dim, DirectMap map,
                                        std::string name) {
  ClosedLoopModel m;
  m.n_ = state_dim;
  m.q_ = error_dim;
  m.name_ = std::move(name);
  m.direct_ = std::move(map);
  return m;
}

Vec ClosedLoopModel::operator()(std::span<const double> x,
                                std::span<const double> e, double T) const {
  if (step_) return discretize_step(*step_, x, controller_->eval(x, e, T), T);
  return direct_(x, e, T);
}

Vec closed_loop_step(const ClosedLoopModel& model, std::span<const double> x,
                     std::span<const double> e, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("sampling period must be positive");
  if (x.size() != model.state_dim() || e.size() != model.error_dim())
    throw InvalidSpec("closed-loop step called with wrong dimensions");
  return model(x, e, T);
}

Box Box::symmetric(std::size_t dim, double half_width) {
  return Box{Vec(dim, -half_width), Vec(dim, half_width)};
}

namespace {

std::vector<std::vector<double>> box_axes(const Box& b, std::size_t per_axis) {
  std::vector<std::vector<double>> axes;
  for (std::size_t i = 0; i < b.dim(); ++i) {
    if (b.lower[i] > b.upper[i]) throw EmptyDomain("box with lower > upper");
    axes.push_back(linspace(b.lower[i], b.upper[i], per_axis));
  }
  return axes;
}

std::size_t fit_points(std::size_t requested, std::size_t dims,
                       std::size_t max_points) {
  std::size_t p = std::max<std::size_t>(requested, 2);
  while (p > 2 && std::pow(static_cast<double>(p), static_cast<double>(dims)) >
                      static_cast<double>(max_points))
    --p;
  return p;
}

}  // namespace

ExistenceHorizon existence_horizon(const VectorField& f, const Box& initial,
                                   const Box& inputs, const SupremumGrid& grid) {
  if (initial.dim() != f.state_dim || inputs.dim() != f.input_dim)
    throw EmptyDomain("boxes do not match the vector field dimensions");
  for (std::size_t i = 0; i < initial.dim(); ++i)
    if (initial.lower[i] > initial.upper[i]) throw EmptyDomain("empty initial box");
  for (std::size_t i = 0; i < inputs.dim(); ++i)
    if (inputs.lower[i] > inputs.upper[i]) throw EmptyDomain("empty input box");

  // max |x| over a box is attained at the corner of largest magnitudes.
  Vec corner(initial.dim());
  for (std::size_t i = 0; i < initial.dim(); ++i)
    corner[i] = std::max(std::fabs(initial.lower[i]), std::fabs(initial.upper[i]));
  ExistenceHorizon h;
  h.r = std::max(1.0, norm(corner));

  const std::size_t dims = f.state_dim + f.input_dim;
  const std::size_t p = fit_points(grid.points_per_axis, dims, grid.max_points);
  const Box big = Box::symmetric(f.state_dim, 2.0 * h.r);
  TensorGrid xs(box_axes(big, p));
  TensorGrid us(box_axes(inputs, p));
  const double radius = 2.0 * h.r * (1.0 + 1e-12);

  double sup = 0.0;
  Vec x(f.state_dim), u(f.input_dim);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs.point(i, x);
    if (norm(x) > radius) continue;
    for (std::size_t j = 0; j < us.size(); ++j) {
      us.point(j, u);
      sup = std::max(sup, norm(f.eval(x, u)));
    }
  }
  constexpr double kFloor = 1e-12;
  h.C = grid.safety * sup;
  if (h.C < kFloor) {
    h.C = kFloor;
    h.unbounded = true;
  }
  h.Tstar = h.r / h.C;
  return h;
}

double lipschitz_estimate(const VectorField& f, const Box& region,
                          std::span<const double> u, const SupremumGrid& grid) {
  if (region.dim() != f.state_dim) throw EmptyDomain("region dimension mismatch");
  const std::size_t p = fit_points(grid.points_per_axis, f.state_dim, grid.max_points);
  const auto axes = box_axes(region, p);
  TensorGrid xs(axes);
  double L = 0.0;
  Vec x(f.state_dim), y(f.state_dim);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs.point(i, x);
    const Vec fx = f.eval(x, u);
    for (std::size_t d = 0; d < f.state_dim; ++d) {
      const auto& ax = axes[d];
      const auto pos = std::find(ax.begin(), ax.end(), x[d]);
      if (pos == ax.end() || pos + 1 == ax.end()) continue;
      y = x;
      y[d] = *(pos + 1);
      const Vec fy = f.eval(y, u);
      Vec diff(fx.size());
      for (std::size_t k = 0; k < fx.size(); ++k) diff[k] = fx[k] - fy[k];
      L = std::max(L, norm(diff) / std::fabs(y[d] - x[d]));
    }
  }
  return grid.safety * L;
}

}  // namespace vsr
