#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "vsr/linalg.hpp"

namespace vsr {

/// Continuous-time plant dx/dt = f(x, u).
struct VectorField {
  std::size_t state_dim = 1;
  std::size_t input_dim = 1;
  std::function<Vec(std::span<const double> x, std::span<const double> u)> eval;
  std::string name;
};

/// Sampled controller u_k = U(x_k, e_k, T_k); e is the measurement error
/// (or disturbance) entering at the sampling instant.
struct Controller {
  std::size_t error_dim = 1;
  std::size_t input_dim = 1;
  std::function<Vec(std::span<const double> x, std::span<const double> e, double T)>
      eval;
  std::string name;
};

enum class StepMethod { Euler, RK4, TightIntegration, Analytic };

std::string_view to_string(StepMethod m);

/// Discrete-time model x+ = F(x, u, T) with u held over the period.
struct DiscreteStepMap {
  StepMethod method = StepMethod::Euler;
  std::optional<VectorField> field;  // absent for Analytic
  /// Error tolerance of TightIntegration over one period.
  double tolerance = 1e-10;
  /// State-norm cap that signals finite escape during integration.
  double escape_cap = 1e9;
  std::function<Vec(std::span<const double> x, std::span<const double> u, double T)>
      analytic;
};

/// x+ for one period. Euler: x + T f(x,u); RK4: classical four-stage step;
/// TightIntegration: adaptive Dormand-Prince integration over [0, T], the
/// stand-in for the exact sampled model. Throws FiniteEscape.
Vec discretize_step(const DiscreteStepMap& step, std::span<const double> x,
                    std::span<const double> u, double T);

/// Closed-loop map x+ = Fbar(x, e, T), either composed from a step map and a
/// controller or given directly.
class ClosedLoopModel {
 public:
  using DirectMap =
      std::function<Vec(std::span<const double> x, std::span<const double> e, double T)>;

  static ClosedLoopModel composed(DiscreteStepMap step, Controller controller,
                                  std::string name);
  static ClosedLoopModel direct(std::size_t state_dim, std::size_t error_dim,
                                DirectMap map, std::string name);

  Vec operator()(std::span<const double> x, std::span<const double> e,
                 double T) const;

  std::size_t state_dim() const { return n_; }
  std::size_t error_dim() const { return q_; }
  const std::string& name() const { return name_; }
  bool is_composed() const { return step_.has_value(); }
  const DiscreteStepMap& step_map() const { return *step_; }
  const Controller& controller() const { return *controller_; }

 private:
  std::size_t n_ = 1;
  std::size_t q_ = 1;
  std::string name_;
  std::optional<DiscreteStepMap> step_;
  std::optional<Controller> controller_;
  DirectMap direct_;
};

Vec closed_loop_step(const ClosedLoopModel& model, std::span<const double> x,
                     std::span<const double> e, double T);

/// Axis-aligned compact box; lower == upper on an axis pins that coordinate.
struct Box {
  Vec lower;
  Vec upper;

  static Box symmetric(std::size_t dim, double half_width);
  std::size_t dim() const { return lower.size(); }
};

struct SupremumGrid {
  std::size_t points_per_axis = 201;
  /// Cap on total grid evaluations; points per axis shrink to respect it.
  std::size_t max_points = 4'000'000;
  /// Multiplier on grid maxima (grid suprema are optimistic).
  double safety = 1.1;
};

struct ExistenceHorizon {
  double Tstar = 0.0;
  double r = 0.0;
  double C = 0.0;
  /// True when |f| vanished on the grid and C was floored.
  bool unbounded = false;
};

/// Solutions from the box `initial` with inputs in `inputs` exist on
/// [0, r/C) where r = max{1, max |x|} and C bounds |f| on {|x| <= 2r} x inputs.
ExistenceHorizon existence_horizon(const VectorField& f, const Box& initial,
                                   const Box& inputs,
                                   const SupremumGrid& grid = {});

/// Largest difference quotient |f(x,u) - f(y,u)| / |x - y| over neighbouring
/// grid points along each axis, times `grid.safety`.
double lipschitz_estimate(const VectorField& f, const Box& region,
                          std::span<const double> u,
                          const SupremumGrid& grid = {.safety = 1.0});

/// Built-in and expression-defined models.
///
///   cubic_example              cubic Euler loop with measurement error
///                              (alias paper_example)
///   cubic_example:composed     same loop built from plant, Euler and controller
///   identity | zero            x+ = x  |  x+ = 0
///   unstable                   x+ = x + T x
///   drift                      x+ = x + T (origin not fixed)
///   euler:<f> | rk4:<f> | exact:<f>
///                              plant f(x,u) components separated by ';' over
///                              x1..xn, u1..um; `controller` gives U(x,e,T)
///                              over x*, e*, T (default u = e)
///   map:<F>                    direct closed loop over x*, e*, T
ClosedLoopModel make_model(std::string_view reference,
                           std::string_view controller = {});

/// Plant f(x,u) from ';'-separated component expressions.
VectorField parse_vector_field(std::string_view components);

}  // namespace vsr
