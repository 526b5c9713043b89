#include "vsr/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "vsr/errors.hpp"
#include "vsr/grid.hpp"
#include "vsr/parallel.hpp"

namespace vsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlopeFloor = 1e-9;

double max_norm(const Trajectory& tr) {
  if (tr.diverged_at) return kInf;
  double m = 0.0;
  for (const auto& x : tr.states) m = std::max(m, norm(x));
  return m;
}

}  // namespace

double comparison_ode(const ComparisonFn& alpha, double s, double t,
                      const FlowOptions& options) {
  if (!(t >= 0.0)) throw std::invalid_argument("comparison flow time must be >= 0");
  const double ts[1] = {t};
  return comparison_flow(alpha, s, ts, options).front();
}

ComparisonFn decrease_rate(const ComparisonFn& alpha2, const ComparisonFn& alpha3) {
  return compose_k(alpha3, inverse_k(alpha2));
}

KLFn beta_from_certificate(const ComparisonFn& alpha1, const ComparisonFn& alpha2,
                           const ComparisonFn& alpha3, double scale) {
  if (!(scale >= 1.0)) throw InvalidSpec("envelope scale must be >= 1");
  return KLFn::from_flow(decrease_rate(alpha2, alpha3), alpha2, alpha1, scale);
}

std::vector<double> increasing_envelope(std::span<const double> s,
                                        std::span<const double> v) {
  if (s.size() != v.size() || s.empty())
    throw InvalidSpec("envelope needs matching, non-empty tables");
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!(s[i] > (i ? s[i - 1] : 0.0)))
      throw InvalidSpec("envelope abscissae must be positive and strictly increasing");
  const std::size_t n = s.size();
  std::vector<double> run(n);
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) run[i] = m = std::max(m, v[i]);
  // Between knots i and i+1 the sampled function is at most its value at
  // i+1, so knot i carries the running maximum one knot ahead.
  std::vector<double> z(n);
  double prev_s = 0.0, prev_z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = std::max(run[std::min(i + 1, n - 1)], prev_z + kSlopeFloor * (s[i] - prev_s));
    prev_s = s[i];
    prev_z = z[i];
  }
  return z;
}

SigmaEta sigma_eta_estimate(const ClosedLoopModel& model, const ComparisonFn& rho,
                            const SigmaGrid& grid) {
  if (!(grid.T_bound > 0.0)) throw InvalidSpec("T_bound must be positive");
  SigmaEta out;
  out.s = grid.s_grid;
  if (out.s.empty()) {
    if (!(grid.s_max > 0.0)) throw InvalidSpec("s_max must be positive");
    for (int j = 1; j <= 24; ++j) out.s.push_back(grid.s_max * j / 24.0);
  }
  std::sort(out.s.begin(), out.s.end());
  out.s.erase(std::unique(out.s.begin(), out.s.end()), out.s.end());
  if (!out.s.empty() && out.s.front() == 0.0) out.s.erase(out.s.begin());
  if (out.s.empty()) throw InvalidSpec("sigma grid has no positive argument");

  const auto Ts = open_interval_points(grid.T_bound, grid.t_points);
  struct Cell {
    double sup = 0.0;
    std::size_t skipped = 0;
  };
  const auto cells = parallel_map<Cell>(out.s.size(), grid.workers, [&](std::size_t i) {
    Cell c;
    const double s = out.s[i];
    const auto xs = ball_points(model.state_dim(), eval_k(rho, s), grid.x);
    const auto es = ball_points(model.error_dim(), s, grid.e);
    for (const auto& x : xs)
      for (const auto& e : es)
        for (double T : Ts) {
          double r;
          try {
            r = norm(model(x, e, T));
          } catch (const Error&) {
            ++c.skipped;
            continue;
          }
          if (!std::isfinite(r)) {
            ++c.skipped;
            continue;
          }
          c.sup = std::max(c.sup, r);
        }
    return c;
  });
  for (const auto& c : cells) {
    out.sigma.push_back(c.sup);
    out.skipped_points += c.skipped;
  }
  out.zeta_knots = increasing_envelope(out.s, out.sigma);
  out.zeta = ComparisonFn::table(out.s, out.zeta_knots, ClassKind::KInfinity,
                                 Extrapolation::Linear);
  out.eta = max_k(out.zeta, rho);
  out.caveats.push_back("sigma is a grid supremum over periods in (0, " +
                        std::to_string(grid.T_bound) + ")");
  out.caveats.push_back("zeta extends linearly beyond s = " + std::to_string(out.s.back()));
  if (out.skipped_points)
    out.caveats.push_back(std::to_string(out.skipped_points) +
                          " model evaluations failed and were skipped");
  return out;
}

ComparisonFn gamma_from_certificate(const ComparisonFn& alpha1,
                                    const ComparisonFn& alpha2,
                                    const ComparisonFn& eta) {
  return compose_k(inverse_k(alpha1), scale_k(2.0, compose_k(alpha2, eta)));
}

double tbar_threshold() {
  auto f = [](double T) { return 1.0 - std::exp(-2.0 * T) - T; };
  double lo = 0.5, hi = 1.0;  // f(lo) > 0 > f(hi)
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return lo;
}

double inflate_certification_radius(const ComparisonFn& alpha1,
                                    const ComparisonFn& alpha2, double M0, double E0,
                                    const std::optional<ComparisonFn>& eta) {
  if (!(M0 >= 0.0) || !(E0 >= 0.0)) throw InvalidSpec("radii must be nonnegative");
  double r = M0;
  if (eta) r = std::max(r, eval_k(*eta, E0));
  return invert_k(alpha1, eval_k(alpha2, r));
}

double converse_lyapunov_estimate(const ClosedLoopModel& model,
                                  const ComparisonFn& alpha1,
                                  std::span<const double> xi,
                                  const ConverseBudget& budget) {
  if (xi.size() != model.state_dim()) throw InvalidSpec("xi has wrong dimension");
  double best = eval_k(alpha1, norm(xi));
  if (budget.horizon == 0 || budget.scenarios == 0) return best;
  SamplingSpec ss;
  ss.mode = SamplingMode::IIDUniform;
  ss.T_max = budget.T_star;
  ss.length = budget.horizon;
  ss.seed = budget.seed;
  ErrorSpec es;
  es.mode = budget.D > 0.0 ? ErrorMode::IIDBall : ErrorMode::Zero;
  es.bound = budget.D;
  es.dim = model.error_dim();
  es.length = budget.horizon;
  es.seed = budget.seed;
  const auto vals = parallel_map<double>(budget.scenarios, budget.workers, [&](std::size_t i) {
    const auto periods = gen_sampling(ss, i);
    const auto errors = gen_errors(es, i);
    const Trajectory tr = simulate(model, xi, periods, errors);
    double v = 0.0;
    for (std::size_t k = 0; k < tr.states.size(); ++k)
      v = std::max(v, eval_k(alpha1, norm(tr.states[k])) * std::exp(2.0 * tr.elapsed[k]));
    return v;
  });
  for (double v : vals) best = std::max(best, v);
  return best;
}

EnvelopeReport envelope_check(std::span<const Trajectory> trajectories,
                              const KLFn& beta,
                              const std::optional<ComparisonFn>& gamma, double R,
                              const EnvelopeOptions& options) {
  if (!(R >= 0.0)) throw InvalidSpec("offset R must be nonnegative");
  struct PerScenario {
    std::vector<EnvelopeViolation> violations;
    std::size_t checked = 0;
    double max_excess = -kInf;
  };
  const auto per = parallel_map<PerScenario>(
      trajectories.size(), options.workers, [&](std::size_t idx) {
        PerScenario ps;
        const Trajectory& tr = trajectories[idx];
        if (tr.states.empty()) return ps;
        const auto b = beta.eval_along(norm(tr.states.front()), tr.elapsed);
        double sup_e = 0.0, g = 0.0;
        for (std::size_t k = 0; k < tr.states.size(); ++k) {
          if (k > 0 && gamma) {
            const double en = norm(tr.errors[k - 1]);
            if (en > sup_e) {
              sup_e = en;
              g = eval_k(*gamma, sup_e);
            }
          }
          const double lhs = norm(tr.states[k]);
          const double rhs = b[k] + g + R;
          const double excess = lhs - rhs;
          ++ps.checked;
          ps.max_excess = std::max(ps.max_excess, excess);
          if (excess > options.rel_tol * (1.0 + rhs))
            ps.violations.push_back({idx, k, lhs, rhs, excess});
        }
        return ps;
      });
  EnvelopeReport rep;
  for (const auto& ps : per) {
    rep.checked_points += ps.checked;
    rep.max_excess = std::max(rep.max_excess, ps.max_excess);
    rep.violation_count += ps.violations.size();
    for (const auto& v : ps.violations)
      if (rep.violations.size() < options.max_reported) rep.violations.push_back(v);
  }
  for (const auto& tr : trajectories)
    if (tr.diverged_at) ++rep.diverged_scenarios;
  return rep;
}

GainConstruction construct_gains(const ClosedLoopModel& model,
                                 const LyapunovCandidate& cand, DecreaseMode mode,
                                 double M0, double E0, const SigmaGrid& sigma_grid) {
  GainConstruction g;
  g.mode = mode;
  g.M0 = M0;
  g.E0 = E0;
  g.tbar = tbar_threshold();
  g.alpha = decrease_rate(cand.alpha2, cand.alpha3);
  if (mode == DecreaseMode::RobustStability) {
    g.beta = beta_from_certificate(cand.alpha1, cand.alpha2, cand.alpha3, 1.0);
    g.M = inflate_certification_radius(cand.alpha1, cand.alpha2, M0);
    return g;
  }
  if (!cand.rho) throw InvalidSpec("input-to-state envelopes need rho");
  SigmaGrid sg = sigma_grid;
  if (sg.s_grid.empty()) sg.s_max = std::max(sg.s_max, E0);
  g.sigma = sigma_eta_estimate(model, *cand.rho, sg);
  g.gamma = gamma_from_certificate(cand.alpha1, cand.alpha2, g.sigma->eta);
  g.beta = beta_from_certificate(cand.alpha1, cand.alpha2, cand.alpha3, 2.0);
  g.M = inflate_certification_radius(cand.alpha1, cand.alpha2, M0, E0, g.sigma->eta);
  return g;
}

ProbeTables stability_probe(const ClosedLoopModel& model, const ProbeSpec& spec) {
  if (!(spec.M > 0.0) || !(spec.T_probe > 0.0) || !(spec.D >= 0.0))
    throw InvalidSpec("probe needs M > 0, T_probe > 0 and D >= 0");
  if (spec.scenarios == 0 || spec.horizon == 0)
    throw InvalidSpec("probe needs at least one scenario and one step");

  auto ensemble = [&](double radius) {
    EnsembleSpec es;
    es.scenarios = spec.scenarios;
    es.x0_radius = radius;
    es.x0_mode = InitialMode::Alternating;
    es.sampling.mode = SamplingMode::IIDUniform;
    es.sampling.T_max = spec.T_probe;
    es.sampling.length = spec.horizon;
    es.errors.mode = spec.D > 0.0 ? ErrorMode::IIDBall : ErrorMode::Zero;
    es.errors.bound = spec.D;
    es.errors.dim = model.error_dim();
    es.seed = spec.seed;
    return simulate_ensemble(model, es, spec.workers);
  };

  ProbeTables out;
  std::vector<double> cands = spec.delta_candidates;
  if (cands.empty()) {
    const double span = std::log10(spec.M) + 4.0;
    if (span <= 0.0)
      cands.push_back(spec.M);
    else
      for (int j = 0; j <= 20; ++j) cands.push_back(std::pow(10.0, -4.0 + span * j / 20.0));
  }
  std::sort(cands.begin(), cands.end());
  std::vector<double> reach;
  for (double r : cands) {
    double m = 0.0;
    for (const auto& tr : ensemble(r)) m = std::max(m, max_norm(tr));
    reach.push_back(m);
  }
  std::vector<double> eps = spec.eps_grid;
  std::sort(eps.begin(), eps.end());
  for (double e : eps) {
    ProbeTables::Delta d{e, std::nullopt};
    for (std::size_t k = 0; k < cands.size() && reach[k] <= e; ++k) d.delta = cands[k];
    out.delta.push_back(d);
  }

  const auto trs = ensemble(spec.M);
  std::vector<double> Ls = spec.L_grid;
  std::sort(Ls.begin(), Ls.end());
  for (double L : Ls) {
    double C = 0.0;
    for (const auto& tr : trs) {
      for (std::size_t k = 0; k < tr.states.size() && tr.elapsed[k] <= L; ++k)
        C = std::max(C, norm(tr.states[k]));
      if (tr.diverged_at) {
        const std::size_t last = tr.states.size() - 1;
        if (tr.elapsed[last] + tr.periods[last] <= L) C = kInf;
      }
    }
    out.C.push_back({L, C});
  }
  for (double e : eps) {
    double worst = 0.0;
    for (const auto& tr : trs) {
      if (tr.diverged_at) {
        worst = kInf;
        break;
      }
      std::size_t last_above = tr.states.size();
      for (std::size_t k = 0; k < tr.states.size(); ++k)
        if (norm(tr.states[k]) > e) last_above = k;
      if (last_above == tr.states.size()) continue;
      if (last_above + 1 == tr.states.size()) {
        worst = kInf;
        break;
      }
      worst = std::max(worst, tr.elapsed[last_above + 1]);
    }
    out.attract.push_back({e, std::isinf(worst) ? std::nullopt : std::optional<double>(worst)});
  }
  out.caveats.push_back("tables are empirical over " + std::to_string(spec.scenarios) +
                        " scenarios of " + std::to_string(spec.horizon) + " steps");
  out.caveats.push_back("delta(eps) is probed for this M only");
  return out;
}

}  // namespace vsr
