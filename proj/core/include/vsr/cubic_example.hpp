#pragma once

#include <cstddef>

#include "vsr/certifier.hpp"
#include "vsr/models.hpp"

/// Scalar cubic plant dx/dt = x^3 + u under the sampled controller
/// u = -xh - 3 xh^3 with xh = x + e, discretized by Euler. V(x) = x^2 is an
/// input-to-state Lyapunov function for small enough periods.
namespace vsr::example {

/// x - T [2x^3 + 9e x^2 + (9e^2 + 1) x + 3e^3 + e]
double example_model(double x, double e, double T);

struct Coeffs {
  double a;
  double b;
  double c;
  double d;
};

/// Bounding polynomials in the gain-margin parameter K.
Coeffs example_coeffs(double K);

/// min{1 / (2 b(K)), 1 / (2 (a(K) M^4 + c(K)))}
double example_ttilde(double M, double K);

struct HG {
  double h;
  double g;
};

/// V(Fbar) - V(x) = (h + g T) T for V = x^2.
HG example_hg(double x, double e);

VectorField example_plant();
Controller example_controller();
/// Closed loop evaluated from the closed-form polynomial.
ClosedLoopModel example_closed_loop();
/// Same loop assembled from plant, controller and an Euler step.
ClosedLoopModel example_composed();

/// V = x^2, alpha1 = alpha2 = s^2, alpha3 = 3s^4 + s^2, rho = s/K, E = K M.
LyapunovCandidate example_candidate(double M, double K);

struct ExampleGrid {
  std::size_t x_points = 2001;
  /// Per x: points of |e| <= K|x|.
  std::size_t e_points = 101;
  /// Periods T_j = Ttilde j / (t_points + 1).
  std::size_t t_points = 64;
  unsigned workers = 1;
};

struct ExampleReport {
  double M = 0.0;
  double K = 0.0;
  Coeffs coeffs{};
  double ttilde = 0.0;
  /// Margins come from the generic decrease check; `max_route_gap` is the
  /// largest difference to the closed-form margin -[(h + gT)T + T alpha3].
  CertificationReport report;
  double max_route_gap = 0.0;
};

ExampleReport verify_example(double M, double K, const ExampleGrid& grid = {});

}  // namespace vsr::example
