#include "vsr/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include "vsr/errors.hpp"
#include "vsr/expression.hpp"
#include "vsr/parallel.hpp"

namespace vsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Candidate {
  double margin = kInf;
  Witness w;
  bool valid = false;
};

bool lex_less(const Witness& a, const Witness& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.e != b.e) return a.e < b.e;
  return a.T < b.T;
}

// Order-independent "worse than" with lexicographic tie-break.
bool worse(const Candidate& a, const Candidate& b) {
  if (!a.valid) return false;
  if (!b.valid) return true;
  if (a.margin != b.margin) return a.margin < b.margin;
  return lex_less(a.w, b.w);
}

std::string describe_grid(const GridStats& g) {
  std::ostringstream os;
  os << "grid evidence only: " << g.evaluated << " evaluated points ("
     << g.x_points << " x, " << g.e_points << " e, " << g.t_points
     << " T); x cell radius " << g.x_cell_radius;
  return os.str();
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::CertifiedOnGrid: return "CertifiedOnGrid";
    case Verdict::ViolatedAt: return "ViolatedAt";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

std::string_view to_string(DecreaseMode m) {
  return m == DecreaseMode::RobustStability ? "rss" : "siss";
}

LyapunovFn parse_lyapunov(std::string_view text, std::size_t state_dim) {
  std::vector<std::string> vars{"s"};
  for (std::size_t i = 1; i <= state_dim; ++i) vars.push_back("x" + std::to_string(i));
  auto expr = std::make_shared<const Expression>(Expression::parse(text, vars));
  return [expr, state_dim](std::span<const double> x) {
    std::vector<double> v(state_dim + 1);
    v[0] = norm(x);
    std::copy(x.begin(), x.end(), v.begin() + 1);
    return expr->eval(v);
  };
}

CertificationReport check_sandwich(const LyapunovCandidate& cand,
                                   std::size_t state_dim,
                                   const BallGridSpec& x_grid) {
  CertificationReport rep;
  const auto pts = ball_points(state_dim, cand.M, x_grid);
  rep.grid.x_points = pts.size();
  rep.grid.x_cell_radius = ball_grid_cell_radius(state_dim, cand.M, x_grid);
  Candidate best;
  for (const auto& x : pts) {
    const double r = norm(x);
    const double v = cand.V(x);
    double lower = v - eval_k(cand.alpha1, r);
    if (std::isinf(v) && v > 0) lower = kInf;
    double upper = r <= cand.M ? eval_k(cand.alpha2, r) - v : kInf;
    if (std::isnan(lower) || std::isnan(upper)) {
      ++rep.grid.inconclusive;
      continue;
    }
    ++rep.grid.evaluated;
    Candidate c{std::min(lower, upper), Witness{x, {}, 0.0}, true};
    if (worse(c, best)) best = c;
  }
  rep.caveats.push_back(describe_grid(rep.grid));
  rep.caveats.push_back("lower bound alpha1(|x|) <= V(x) is global but was checked on |x| <= M only");
  if (!best.valid) {
    rep.verdict = Verdict::Inconclusive;
    rep.caveats.push_back("empty grid");
    return rep;
  }
  rep.min_margin = best.margin;
  rep.witness = best.w;
  if (best.margin < 0.0)
    rep.verdict = Verdict::ViolatedAt;
  else
    rep.verdict = rep.grid.inconclusive ? Verdict::Inconclusive : Verdict::CertifiedOnGrid;
  return rep;
}

double decrease_margin(const ClosedLoopModel& model,
                       const LyapunovCandidate& cand, std::span<const double> x,
                       std::span<const double> e, double T) {
  const double vx = cand.V(x);
  if (!std::isfinite(vx)) return std::nan("");
  Vec next;
  try {
    next = model(x, e, T);
  } catch (const FiniteEscape&) {
    return -kInf;
  }
  if (!all_finite(next)) return -kInf;
  const double vn = cand.V(next);
  // + 0.0 folds -0 into +0 so reports never show a negative zero.
  return -((vn - vx) + T * eval_k(cand.alpha3, norm(x))) + 0.0;
}

CertificationReport certify_decrease_at(const ClosedLoopModel& model,
                                        const LyapunovCandidate& cand,
                                        DecreaseMode mode,
                                        std::span<const double> periods,
                                        const DecreaseGrid& grid) {
  if (mode == DecreaseMode::InputToState && !cand.rho)
    throw InvalidSpec("input-to-state certification needs rho");
  for (double T : periods)
    if (!(T > 0.0)) throw InvalidSpec("sampling periods must be positive");

  const std::size_t n = model.state_dim();
  const std::size_t q = model.error_dim();
  const auto xs = ball_points(n, cand.M, grid.x);
  const auto es = ball_points(q, cand.bound, grid.e);
  std::vector<double> e_norms(es.size());
  for (std::size_t j = 0; j < es.size(); ++j) e_norms[j] = norm(es[j]);
  std::vector<double> e_gate(es.size(), 0.0);
  if (mode == DecreaseMode::InputToState)
    for (std::size_t j = 0; j < es.size(); ++j) e_gate[j] = eval_k(*cand.rho, e_norms[j]);

  struct Partial {
    Candidate best;
    std::size_t evaluated = 0, excluded = 0, inconclusive = 0, failed = 0;
  };
  const unsigned workers = std::max(1u, grid.workers);
  std::vector<Partial> partials(std::min<std::size_t>(workers, std::max<std::size_t>(xs.size(), 1)));

  parallel_chunks(xs.size(), workers, [&](std::size_t b, std::size_t end, std::size_t c) {
    Partial& p = partials[c];
    for (std::size_t i = b; i < end; ++i) {
      const Vec& x = xs[i];
      const double rx = norm(x);
      for (std::size_t j = 0; j < es.size(); ++j) {
        if (mode == DecreaseMode::InputToState && e_gate[j] > rx) {
          ++p.excluded;
          continue;
        }
        for (double T : periods) {
          const double m = decrease_margin(model, cand, x, es[j], T);
          if (std::isnan(m)) {
            ++p.inconclusive;
            continue;
          }
          if (m == -kInf) ++p.failed;
          ++p.evaluated;
          Candidate cnd{m, Witness{}, true};
          if (!p.best.valid || m <= p.best.margin) {
            cnd.w = Witness{x, es[j], T};
            if (worse(cnd, p.best)) p.best = std::move(cnd);
          }
        }
      }
    }
  });

  CertificationReport rep;
  Candidate best;
  for (const auto& p : partials) {
    if (worse(p.best, best)) best = p.best;
    rep.grid.evaluated += p.evaluated;
    rep.grid.excluded_by_region += p.excluded;
    rep.grid.inconclusive += p.inconclusive;
    rep.grid.failed_evaluations += p.failed;
  }
  rep.grid.x_points = xs.size();
  rep.grid.e_points = es.size();
  rep.grid.t_points = periods.size();
  rep.grid.x_cell_radius = ball_grid_cell_radius(n, cand.M, grid.x);
  rep.grid.e_cell_radius = ball_grid_cell_radius(q, cand.bound, grid.e);
  if (!periods.empty()) {
    const double T_hi = *std::max_element(periods.begin(), periods.end());
    rep.T_used = T_hi;
    rep.grid.t_spacing = T_hi / static_cast<double>(periods.size());
  }
  rep.caveats.push_back(describe_grid(rep.grid));
  if (rep.grid.inconclusive)
    rep.caveats.push_back(std::to_string(rep.grid.inconclusive) +
                          " points with V(x) = +inf left undecided");
  if (rep.grid.failed_evaluations)
    rep.caveats.push_back(std::to_string(rep.grid.failed_evaluations) +
                          " model evaluations escaped; counted as violations");

  if (!best.valid) {
    rep.verdict = Verdict::Inconclusive;
    rep.min_margin = 0.0;
    rep.caveats.push_back("no grid point inside the certification region");
    return rep;
  }
  rep.min_margin = best.margin;
  rep.witness = best.w;
  if (best.margin < 0.0)
    rep.verdict = Verdict::ViolatedAt;
  else if (rep.grid.inconclusive)
    rep.verdict = Verdict::Inconclusive;
  else
    rep.verdict = Verdict::CertifiedOnGrid;

  if (grid.lipschitz) {
    const double half_diag =
        std::sqrt(rep.grid.x_cell_radius * rep.grid.x_cell_radius +
                  rep.grid.e_cell_radius * rep.grid.e_cell_radius +
                  0.25 * rep.grid.t_spacing * rep.grid.t_spacing);
    const double needed = *grid.lipschitz * half_diag;
    rep.lipschitz_rigorous = rep.verdict == Verdict::CertifiedOnGrid && best.margin >= needed;
    rep.caveats.push_back(*rep.lipschitz_rigorous
                              ? "margin dominates Lipschitz bound L*h = " + std::to_string(needed)
                              : "margin below Lipschitz bound L*h = " + std::to_string(needed) +
                                    "; grid verdict not upgraded");
  }
  return rep;
}

CertificationReport certify_decrease(const ClosedLoopModel& model,
                                     const LyapunovCandidate& cand,
                                     DecreaseMode mode, double T_bound,
                                     const DecreaseGrid& grid) {
  if (!(T_bound > 0.0)) throw InvalidSpec("T_bound must be positive");
  const auto periods = open_interval_points(T_bound, grid.t_points);
  auto rep = certify_decrease_at(model, cand, mode, periods, grid);
  rep.T_used = T_bound;
  return rep;
}

MaxPeriodResult max_sampling_period(const ClosedLoopModel& model,
                                    const LyapunovCandidate& cand,
                                    DecreaseMode mode, const PeriodScan& scan,
                                    const DecreaseGrid& grid) {
  if (!(scan.T_hi > 0.0) || scan.coarse == 0)
    throw InvalidSpec("period scan needs T_hi > 0 and coarse >= 1");
  auto certified_at = [&](double T) {
    const double one[1] = {T};
    return certify_decrease_at(model, cand, mode, one, grid).verdict ==
           Verdict::CertifiedOnGrid;
  };

  std::vector<bool> ok(scan.coarse);
  std::vector<double> Ts(scan.coarse);
  for (std::size_t j = 0; j < scan.coarse; ++j) {
    Ts[j] = scan.T_hi * static_cast<double>(j + 1) / static_cast<double>(scan.coarse);
    ok[j] = certified_at(Ts[j]);
  }
  if (!ok[0])
    throw NoneCertified("smallest scanned period " + std::to_string(Ts[0]) +
                        " does not certify");

  std::vector<std::string> notes;
  const auto first_fail = std::find(ok.begin(), ok.end(), false);
  double lo, hi;
  if (first_fail == ok.end()) {
    lo = hi = scan.T_hi;
    notes.push_back("every scanned period certified; T_hi is a lower bound on the maximum");
  } else {
    const std::size_t j = static_cast<std::size_t>(first_fail - ok.begin());
    lo = Ts[j - 1];
    hi = Ts[j];
    if (std::find(first_fail, ok.end(), true) != ok.end())
      notes.push_back("certified periods do not form a prefix interval; only the leading interval is reported");
    while (hi - lo > scan.refine_tol) {
      const double mid = 0.5 * (lo + hi);
      if (certified_at(mid))
        lo = mid;
      else
        hi = mid;
    }
  }

  // Final sweep over the open interval plus the endpoint itself.
  auto periods = open_interval_points(lo, grid.t_points);
  periods.push_back(lo);
  MaxPeriodResult res;
  res.report = certify_decrease_at(model, cand, mode, periods, grid);
  res.report.T_used = lo;
  res.T_max_certified = lo;
  res.report.T_max_certified = lo;
  for (auto& n : notes) res.report.caveats.push_back(std::move(n));
  return res;
}

namespace {

// Fixed point set of the ball of radius max(radii): a tensor grid (low
// dimensions) or Latin-hypercube sample, plus points at each listed radius
// along every coordinate axis. Filtering this one set by radius yields nested
// subsets, so suprema are monotone in the radius.
std::vector<Vec> nested_ball_points(std::size_t dim, const std::vector<double>& radii,
                                    const StructuralSpec& spec) {
  double R = 0.0;
  for (double r : radii) R = std::max(R, r);
  std::vector<Vec> pts;
  if (dim == 0) {
    pts.emplace_back();
    return pts;
  }
  std::set<Vec> unique;
  unique.insert(Vec(dim, 0.0));
  if (R > 0.0) {
    if (dim <= 2) {
      std::vector<double> axis = linspace(-R, R, std::max<std::size_t>(spec.points_per_axis, 2));
      if (dim == 1)
        for (double r : radii) {
          axis.push_back(r);
          axis.push_back(-r);
        }
      std::sort(axis.begin(), axis.end());
      axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
      TensorGrid g(std::vector<std::vector<double>>(dim, axis));
      for (std::size_t i = 0; i < g.size(); ++i) {
        Vec p = g.point(i);
        if (norm(p) <= R * (1 + 1e-12)) unique.insert(std::move(p));
      }
    } else {
      for (auto& p : latin_hypercube(dim, spec.lhs_samples, R, spec.seed))
        if (norm(p) <= R) unique.insert(std::move(p));
    }
    for (double r : radii)
      for (std::size_t d = 0; d < dim; ++d)
        for (double sgn : {-1.0, 1.0}) {
          Vec p(dim, 0.0);
          p[d] = sgn * r;
          unique.insert(std::move(p));
        }
  }
  pts.assign(unique.begin(), unique.end());
  return pts;
}

}  // namespace

StructuralReport check_structural(const ClosedLoopModel& model,
                                  const StructuralSpec& spec) {
  if (!(spec.T_probe > 0.0)) throw InvalidSpec("T_probe must be positive");
  const std::size_t n = model.state_dim();
  const std::size_t q = model.error_dim();
  const auto Ts = open_interval_points(spec.T_probe, spec.t_points);

  StructuralReport rep;
  rep.T_probe = spec.T_probe;
  const Vec x0(n, 0.0), e0(q, 0.0);
  for (double T : Ts) rep.origin_residual = std::max(rep.origin_residual, norm(model(x0, e0, T)));
  if (!(rep.origin_residual <= spec.origin_atol))
    throw OriginNotFixed("|Fbar(0,0,T)| reaches " + std::to_string(rep.origin_residual),
                         rep.origin_residual);

  std::vector<double> deltas = spec.delta_candidates;
  if (deltas.empty())
    for (int i = 0; i <= 20; ++i) deltas.push_back(std::pow(10.0, -4.0 + 0.2 * i));
  std::sort(deltas.begin(), deltas.end());

  std::vector<double> x_radii = deltas, e_radii = deltas;
  x_radii.insert(x_radii.end(), spec.M_grid.begin(), spec.M_grid.end());
  e_radii.insert(e_radii.end(), spec.E_grid.begin(), spec.E_grid.end());
  const auto xs = nested_ball_points(n, x_radii, spec);
  const auto es = nested_ball_points(q, e_radii, spec);

  // sup over T of |Fbar| for every (x, e) pair.
  std::vector<double> sup_T(xs.size() * es.size());
  parallel_chunks(xs.size(), spec.workers, [&](std::size_t b, std::size_t end, std::size_t) {
    for (std::size_t i = b; i < end; ++i)
      for (std::size_t j = 0; j < es.size(); ++j) {
        double v = 0.0;
        for (double T : Ts) {
          double r;
          try {
            r = norm(model(xs[i], es[j], T));
          } catch (const FiniteEscape&) {
            r = kInf;
          }
          v = std::max(v, std::isnan(r) ? kInf : r);
        }
        sup_T[i * es.size() + j] = v;
      }
  });
  std::vector<double> rx(xs.size()), re(es.size());
  for (std::size_t i = 0; i < xs.size(); ++i) rx[i] = norm(xs[i]);
  for (std::size_t j = 0; j < es.size(); ++j) re[j] = norm(es[j]);
  auto sup_over = [&](double Rx, double Re) {
    const double tx = Rx * (1 + 1e-12), te = Re * (1 + 1e-12);
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (rx[i] > tx) continue;
      for (std::size_t j = 0; j < es.size(); ++j)
        if (re[j] <= te) s = std::max(s, sup_T[i * es.size() + j]);
    }
    return s;
  };

  std::vector<double> sup_delta(deltas.size());
  for (std::size_t k = 0; k < deltas.size(); ++k) sup_delta[k] = sup_over(deltas[k], deltas[k]);

  std::vector<double> eps = spec.eps_grid;
  std::sort(eps.begin(), eps.end());
  for (double e : eps) {
    DeltaEntry entry{e, std::nullopt, 0.0};
    // Largest candidate such that it and every smaller one keep |Fbar| < eps.
    for (std::size_t k = 0; k < deltas.size() && sup_delta[k] < e; ++k) {
      entry.delta = deltas[k];
      entry.sup = sup_delta[k];
    }
    rep.delta_table.push_back(entry);
  }
  for (std::size_t k = 1; k < rep.delta_table.size(); ++k)
    if (rep.delta_table[k].delta.value_or(0.0) < rep.delta_table[k - 1].delta.value_or(0.0))
      rep.delta_monotone = false;

  std::vector<double> Ms = spec.M_grid, Es = spec.E_grid;
  std::sort(Ms.begin(), Ms.end());
  std::sort(Es.begin(), Es.end());
  for (double M : Ms)
    for (double E : Es) rep.C_table.push_back({M, E, sup_over(M, E)});
  const std::size_t nE = Es.size();
  for (std::size_t a = 0; a < Ms.size(); ++a)
    for (std::size_t b = 0; b < nE; ++b) {
      const double c = rep.C_table[a * nE + b].C;
      if (a > 0 && c < rep.C_table[(a - 1) * nE + b].C) rep.C_monotone = false;
      if (b > 0 && c < rep.C_table[a * nE + b - 1].C) rep.C_monotone = false;
    }

  rep.caveats.push_back("suprema are grid maxima over " + std::to_string(xs.size()) +
                        " x points, " + std::to_string(es.size()) + " e points, " +
                        std::to_string(Ts.size()) + " periods");
  rep.caveats.push_back("delta(eps) is verified for the probed region only; independence from M is not checked");
  return rep;
}

}  // namespace vsr
