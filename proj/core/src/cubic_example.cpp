#include "vsr/cubic_example.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vsr/errors.hpp"
#include "vsr/grid.hpp"
#include "vsr/parallel.hpp"

namespace vsr::example {

double example_model(double x, double e, double T) {
  return x - T * (2 * x * x * x + 9 * e * x * x + (9 * e * e + 1) * x + 3 * e * e * e + e);
}

Coeffs example_coeffs(double K) {
  const double K2 = K * K, K3 = K2 * K, K4 = K3 * K, K6 = K4 * K2;
  return Coeffs{9 * K6 + 135 * K4 + 174 * K3 + 117 * K2 + 90 * K + 4,
                6 * K4 + 24 * K3 + 36 * K2 + 22 * K + 4,
                K2 + 2 * K + 1,
                (6 * K2 + 18) * K};
}

double example_ttilde(double M, double K) {
  if (!(K > 0.0)) throw InvalidSpec("K must be positive");
  const Coeffs c = example_coeffs(K);
  const double M4 = M * M * M * M;
  return std::min(1.0 / (2.0 * c.b), 1.0 / (2.0 * (c.a * M4 + c.c)));
}

HG example_hg(double x, double e) {
  const double p = 2 * x * x * x + 9 * e * x * x + (9 * e * e + 1) * x + (3 * e * e * e + e);
  return HG{-2 * x * p, p * p};
}

VectorField example_plant() {
  return VectorField{1, 1,
                     [](std::span<const double> x, std::span<const double> u) {
                       return Vec{x[0] * x[0] * x[0] + u[0]};
                     },
                     "x^3 + u"};
}

Controller example_controller() {
  return Controller{1, 1,
                    [](std::span<const double> x, std::span<const double> e, double) {
                      const double xh = x[0] + e[0];
                      return Vec{-xh - 3 * xh * xh * xh};
                    },
                    "-xh - 3 xh^3"};
}

ClosedLoopModel example_closed_loop() {
  return ClosedLoopModel::direct(
      1, 1,
      [](std::span<const double> x, std::span<const double> e, double T) {
        return Vec{example_model(x[0], e[0], T)};
      },
      "cubic_example");
}

ClosedLoopModel example_composed() {
  DiscreteStepMap step;
  step.method = StepMethod::Euler;
  step.field = example_plant();
  return ClosedLoopModel::composed(std::move(step), example_controller(),
                                   "cubic_example:composed");
}

LyapunovCandidate example_candidate(double M, double K) {
  if (!(K > 0.0)) throw InvalidSpec("K must be positive");
  LyapunovCandidate c;
  c.V = [](std::span<const double> x) {
    double v = 0.0;
    for (double xi : x) v += xi * xi;
    return v;
  };
  c.V_text = "pow(s,2)";
  c.alpha1 = ComparisonFn::power(1.0, 2.0);
  c.alpha2 = ComparisonFn::power(1.0, 2.0);
  c.alpha3 = ComparisonFn::from_expression("3*pow(s,4)+pow(s,2)");
  c.rho = ComparisonFn::power(1.0 / K, 1.0);
  c.M = M;
  c.bound = K * M;
  return c;
}

ExampleReport verify_example(double M, double K, const ExampleGrid& grid) {
  if (!(M >= 0.0)) throw InvalidSpec("M must be nonnegative");
  if (grid.x_points == 0 || grid.e_points == 0 || grid.t_points == 0)
    throw InvalidSpec("example grid needs at least one point per axis");
  ExampleReport out;
  out.M = M;
  out.K = K;
  out.coeffs = example_coeffs(K);
  out.ttilde = example_ttilde(M, K);

  const ClosedLoopModel model = example_closed_loop();
  const LyapunovCandidate cand = example_candidate(M, K);
  const auto xs = linspace(-M, M, grid.x_points);
  const auto Ts = open_interval_points(out.ttilde, grid.t_points);

  struct Partial {
    double margin = std::numeric_limits<double>::infinity();
    Witness w;
    bool valid = false;
    double gap = 0.0;
    std::size_t evaluated = 0;
  };
  const unsigned workers = std::max(1u, grid.workers);
  std::vector<Partial> parts(std::min<std::size_t>(workers, xs.size()));
  auto worse = [](double m, const Witness& w, const Partial& p) {
    if (!p.valid) return true;
    if (m != p.margin) return m < p.margin;
    if (w.x != p.w.x) return w.x < p.w.x;
    if (w.e != p.w.e) return w.e < p.w.e;
    return w.T < p.w.T;
  };

  parallel_chunks(xs.size(), workers, [&](std::size_t b, std::size_t end, std::size_t c) {
    Partial& p = parts[c];
    for (std::size_t i = b; i < end; ++i) {
      const double x = xs[i];
      const double r = K * std::fabs(x);
      const double a3 = 3 * x * x * x * x + x * x;
      for (double e : linspace(-r, r, grid.e_points)) {
        const HG hg = example_hg(x, e);
        const double xv[1] = {x}, ev[1] = {e};
        for (double T : Ts) {
          const double m = decrease_margin(model, cand, xv, ev, T);
          const double closed = -((hg.h + hg.g * T) * T + T * a3);
          p.gap = std::max(p.gap, std::fabs(m - closed));
          ++p.evaluated;
          Witness w{{x}, {e}, T};
          if (worse(m, w, p)) {
            p.margin = m;
            p.w = std::move(w);
            p.valid = true;
          }
        }
      }
    }
  });

  CertificationReport& rep = out.report;
  const Partial* best = nullptr;
  for (const auto& p : parts) {
    out.max_route_gap = std::max(out.max_route_gap, p.gap);
    rep.grid.evaluated += p.evaluated;
    if (p.valid && (!best || worse(p.margin, p.w, *best))) best = &p;
  }
  rep.grid.x_points = xs.size();
  rep.grid.e_points = grid.e_points;
  rep.grid.t_points = Ts.size();
  rep.grid.x_cell_radius = xs.size() > 1 ? M / static_cast<double>(xs.size() - 1) : 0.0;
  rep.grid.e_cell_radius = grid.e_points > 1 ? K * M / static_cast<double>(grid.e_points - 1) : 0.0;
  rep.grid.t_spacing = out.ttilde / static_cast<double>(Ts.size() + 1);
  rep.T_used = out.ttilde;
  rep.min_margin = best->margin;
  rep.witness = best->w;
  rep.verdict = best->margin < 0.0 ? Verdict::ViolatedAt : Verdict::CertifiedOnGrid;
  rep.caveats.push_back("grid evidence only: " + std::to_string(rep.grid.evaluated) +
                        " points of |e| <= K|x|, |x| <= M, T in (0, Ttilde)");
  if (out.max_route_gap > 1e-12)
    rep.caveats.push_back("closed-form and generic margins differ by " +
                          std::to_string(out.max_route_gap));
  return out;
}

}  // namespace vsr::example
