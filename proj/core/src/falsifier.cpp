#include "vsr/falsifier.hpp"

#include <algorithm>
#include <cmath>

#include "vsr/errors.hpp"
#include "vsr/parallel.hpp"
#include "vsr/random.hpp"

namespace vsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOpen = 1e-9;
constexpr double kSlack = 1e-12;

double score_of(double s) { return std::isnan(s) ? -kInf : s; }

void project_ball(Vec& v, double radius) {
  const double r = norm(v);
  if (r > radius && r > 0.0)
    for (auto& c : v) c *= radius / r;
}

double clamp_period(double T, double bound) {
  return std::clamp(T, bound * kOpen, bound * (1.0 - kOpen));
}

// Shrinks e so that rho(|e|) <= |x| holds.
void gate_error(const ComparisonFn& rho, std::span<const double> x, Vec& e) {
  const double ex = norm(e);
  if (ex == 0.0 || eval_k(rho, ex) <= norm(x)) return;
  double cap = 0.0;
  try {
    cap = invert_k(rho, norm(x));
  } catch (const Error&) {
    return;
  }
  double f = std::min(1.0, cap / ex);
  for (int i = 0; i < 60; ++i) {
    Vec t = e;
    for (auto& c : t) c *= f;
    if (eval_k(rho, norm(t)) <= norm(x)) {
      e = std::move(t);
      return;
    }
    f *= 1.0 - 1e-12 * (1 << std::min(i, 30));
  }
  std::fill(e.begin(), e.end(), 0.0);
}

ScenarioScore score_envelope(const ClosedLoopModel& model, const EnvelopeClaim& c,
                             const Scenario& sc, double tol) {
  const Trajectory tr = simulate(model, sc.x0, sc.periods, sc.errors);
  std::vector<double> ts = tr.elapsed;
  if (tr.diverged_at) ts.push_back(tr.elapsed.back() + tr.periods[tr.states.size() - 1]);
  const auto b = c.beta.eval_along(norm(sc.x0), ts);
  ScenarioScore best;
  double sup_e = 0.0, g = 0.0;
  auto consider = [&](std::size_t k, double lhs, double rhs) {
    const double s = score_of(lhs - rhs);
    if (s > best.score) best = ScenarioScore{k, lhs, rhs, s, false};
  };
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (k > 0 && c.gamma) {
      const double en = norm(sc.errors[k - 1]);
      if (en > sup_e) {
        sup_e = en;
        g = eval_k(*c.gamma, sup_e);
      }
    }
    const double lhs = k < tr.states.size() ? norm(tr.states[k]) : kInf;
    consider(k, lhs, b[k] + g + c.R);
  }
  best.violated = best.score > tol * (1.0 + std::fabs(best.rhs));
  return best;
}

ScenarioScore score_decrease(const ClosedLoopModel& model, const DecreaseClaim& c,
                             const Scenario& sc, double tol) {
  ScenarioScore s;
  const Vec& x = sc.x0;
  const Vec& e = sc.errors.front();
  const double T = sc.periods.front();
  s.k = 0;
  if (c.mode == DecreaseMode::InputToState && eval_k(*c.cand.rho, norm(e)) > norm(x))
    return s;  // outside the certification region
  const double margin = decrease_margin(model, c.cand, x, e, T);
  s.rhs = -T * eval_k(c.cand.alpha3, norm(x));
  s.score = score_of(-margin);
  s.lhs = s.score + s.rhs;
  s.violated = s.score > tol * (1.0 + std::fabs(s.rhs));
  return s;
}

void validate(const ClosedLoopModel& model, const Claim& claim, const Scenario& sc) {
  if (sc.x0.size() != model.state_dim()) throw InvalidSpec("x0 has wrong dimension");
  if (sc.periods.size() != sc.errors.size())
    throw InvalidSpec("period and error sequences differ in length");
  double M, E, Tb;
  if (const auto* ec = std::get_if<EnvelopeClaim>(&claim)) {
    M = ec->M0, E = ec->E0, Tb = ec->T_bound;
  } else {
    const auto& dc = std::get<DecreaseClaim>(claim);
    M = dc.cand.M, E = dc.cand.bound, Tb = dc.T_bound;
    if (sc.periods.size() != 1) throw InvalidSpec("decrease witnesses have exactly one step");
    if (dc.mode == DecreaseMode::InputToState && !dc.cand.rho)
      throw InvalidSpec("input-to-state claims need rho");
  }
  if (norm(sc.x0) > M * (1 + kSlack)) throw InvalidSpec("x0 lies outside the claimed ball");
  for (double T : sc.periods)
    if (!(T > 0.0 && T < Tb)) throw InvalidSpec("period outside (0, T_bound)");
  for (const auto& e : sc.errors) {
    if (e.size() != model.error_dim()) throw InvalidSpec("error vector has wrong dimension");
    if (norm(e) > E * (1 + kSlack)) throw InvalidSpec("error exceeds the claimed bound");
  }
}

Scenario envelope_restart(const EnvelopeClaim& c, std::size_t n, std::size_t q,
                          const SearchBudget& b, std::uint64_t r) {
  Scenario sc;
  if (r == 0) {
    // Extremal guess: largest state, longest periods, no error.
    sc.x0.assign(n, 0.0);
    if (n) sc.x0[0] = c.M0;
    sc.periods.assign(b.horizon, clamp_period(c.T_bound * (1.0 - 1e-6), c.T_bound));
    sc.errors.assign(b.horizon, Vec(q, 0.0));
    return sc;
  }
  auto eng = make_engine(b.seed, RngStream::Search, r);
  sc.x0 = sample_ball(n, c.M0, uniform01(eng) < 0.5, b.seed, RngStream::InitialState, r);
  if (uniform01(eng) < 0.5) {
    const double theta = std::min(0.5 + 0.5 * uniform01(eng), 1.0 - 1e-6);
    sc.periods.assign(b.horizon, clamp_period(theta * c.T_bound, c.T_bound));
  } else {
    SamplingSpec ss;
    ss.T_max = c.T_bound;
    ss.length = b.horizon;
    ss.seed = b.seed;
    sc.periods = gen_sampling(ss, r);
  }
  const double u = uniform01(eng);
  if (c.E0 <= 0.0 || q == 0 || u < 1.0 / 3.0) {
    sc.errors.assign(b.horizon, Vec(q, 0.0));
  } else if (u < 2.0 / 3.0) {
    ErrorSpec es;
    es.mode = ErrorMode::IIDSphere;
    es.bound = c.E0;
    es.dim = q;
    es.length = b.horizon;
    es.seed = b.seed;
    sc.errors = gen_errors(es, r);
  } else {
    sc.errors.assign(b.horizon, sample_ball(q, c.E0, true, b.seed, RngStream::Errors, r));
  }
  return sc;
}

Scenario decrease_restart(const DecreaseClaim& c, std::size_t n, std::size_t q,
                          const SearchBudget& b, std::uint64_t r) {
  auto eng = make_engine(b.seed, RngStream::Search, r);
  Scenario sc;
  sc.x0 = sample_ball(n, c.cand.M, uniform01(eng) < 0.5, b.seed, RngStream::InitialState, r);
  Vec e = sample_ball(q, c.cand.bound, uniform01(eng) < 0.5, b.seed, RngStream::Errors, r);
  if (c.mode == DecreaseMode::InputToState) gate_error(*c.cand.rho, sc.x0, e);
  sc.errors.push_back(std::move(e));
  sc.periods.push_back(clamp_period(c.T_bound * uniform01(eng), c.T_bound));
  return sc;
}

struct Radii {
  double M, E, T;
};

Radii radii_of(const Claim& claim) {
  if (const auto* ec = std::get_if<EnvelopeClaim>(&claim)) return {ec->M0, ec->E0, ec->T_bound};
  const auto& dc = std::get<DecreaseClaim>(claim);
  return {dc.cand.M, dc.cand.bound, dc.T_bound};
}

// Neighbouring scenarios for one hill-climbing iteration.
std::vector<Scenario> neighbours(const Scenario& cur, const Claim& claim, double sx,
                                 double sT, double se, std::mt19937_64& eng) {
  const Radii R = radii_of(claim);
  std::vector<Scenario> out;
  for (std::size_t d = 0; d < cur.x0.size(); ++d)
    for (double sgn : {-1.0, 1.0}) {
      Scenario s = cur;
      s.x0[d] += sgn * sx;
      project_ball(s.x0, R.M);
      out.push_back(std::move(s));
    }
  const std::size_t len = cur.periods.size();
  for (double sgn : {-1.0, 1.0}) {
    Scenario s = cur;
    for (auto& T : s.periods) T = clamp_period(T + sgn * sT, R.T);
    out.push_back(std::move(s));
  }
  const auto i = static_cast<std::size_t>(uniform01(eng) * static_cast<double>(len));
  for (double sgn : {-1.0, 1.0}) {
    Scenario s = cur;
    s.periods[i] = clamp_period(s.periods[i] + sgn * sT, R.T);
    out.push_back(std::move(s));
  }
  const std::size_t q = cur.errors.front().size();
  if (R.E > 0.0 && q > 0) {
    Vec dir = sample_ball(q, 1.0, true, eng(), RngStream::Search, 0);
    const auto j = static_cast<std::size_t>(uniform01(eng) * static_cast<double>(len));
    for (double sgn : {-1.0, 1.0}) {
      Scenario s = cur;
      for (std::size_t a = 0; a < q; ++a) s.errors[j][a] += sgn * se * dir[a];
      project_ball(s.errors[j], R.E);
      out.push_back(std::move(s));
      Scenario all = cur;
      for (auto& e : all.errors) {
        for (std::size_t a = 0; a < q; ++a) e[a] += sgn * se * dir[a];
        project_ball(e, R.E);
      }
      out.push_back(std::move(all));
    }
  }
  if (const auto* dc = std::get_if<DecreaseClaim>(&claim);
      dc && dc->mode == DecreaseMode::InputToState)
    for (auto& s : out) gate_error(*dc->cand.rho, s.x0, s.errors.front());
  return out;
}

}  // namespace

ScenarioScore replay(const ClosedLoopModel& model, const Claim& claim,
                     const Scenario& scenario, double rel_tol) {
  validate(model, claim, scenario);
  if (const auto* ec = std::get_if<EnvelopeClaim>(&claim))
    return score_envelope(model, *ec, scenario, rel_tol);
  return score_decrease(model, std::get<DecreaseClaim>(claim), scenario, rel_tol);
}

FalsificationResult falsify(const ClosedLoopModel& model, const Claim& claim,
                            const SearchBudget& budget) {
  const Radii R = radii_of(claim);
  if (!(R.T > 0.0)) throw InvalidSpec("T_bound must be positive");
  if (!(R.M >= 0.0) || !(R.E >= 0.0)) throw InvalidSpec("claim radii must be nonnegative");
  if (budget.restarts == 0) throw InvalidSpec("budget needs at least one restart");
  const bool envelope = std::holds_alternative<EnvelopeClaim>(claim);
  if (envelope && budget.horizon == 0) throw InvalidSpec("budget horizon must be positive");
  if (const auto* dc = std::get_if<DecreaseClaim>(&claim);
      dc && dc->mode == DecreaseMode::InputToState && !dc->cand.rho)
    throw InvalidSpec("input-to-state claims need rho");

  const std::size_t n = model.state_dim(), q = model.error_dim();
  auto restart = [&](std::uint64_t r) {
    return envelope ? envelope_restart(std::get<EnvelopeClaim>(claim), n, q, budget, r)
                    : decrease_restart(std::get<DecreaseClaim>(claim), n, q, budget, r);
  };

  const auto scores = parallel_map<ScenarioScore>(
      budget.restarts, budget.workers,
      [&](std::size_t r) { return replay(model, claim, restart(r)); });

  FalsificationResult res;
  res.scenarios_evaluated = budget.restarts;
  std::size_t best = 0;
  for (std::size_t r = 1; r < scores.size(); ++r)
    if (scores[r].score > scores[best].score) best = r;
  res.best_score = scores[best].score;

  Scenario cur = restart(best);
  ScenarioScore cur_score = scores[best];
  std::size_t steps = 0;
  double sx = 0.25 * R.M, sT = 0.25 * R.T, se = 0.5 * R.E;
  for (std::size_t it = 0; it < budget.local_iterations && !cur_score.violated; ++it) {
    if (sx < 1e-9 * std::max(R.M, 1e-300) && sT < 1e-9 * R.T && se < 1e-9 * std::max(R.E, 1e-300))
      break;
    auto eng = make_engine(budget.seed, RngStream::Search, (std::uint64_t{1} << 40) + it);
    const auto cands = neighbours(cur, claim, sx, sT, se, eng);
    res.scenarios_evaluated += cands.size();
    std::size_t pick = cands.size();
    ScenarioScore pick_score = cur_score;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const auto s = replay(model, claim, cands[i]);
      if (s.score > pick_score.score) {
        pick = i;
        pick_score = s;
      }
    }
    steps = it + 1;
    if (pick == cands.size()) {
      sx *= 0.5;
      sT *= 0.5;
      se *= 0.5;
      continue;
    }
    cur = cands[pick];
    cur_score = pick_score;
  }
  res.best_score = std::max(res.best_score, cur_score.score);
  if (cur_score.violated) res.witness = Counterexample{std::move(cur), cur_score, best, steps};
  return res;
}

}  // namespace vsr
