#include "vsr/trajectory.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "vsr/errors.hpp"
#include "vsr/parallel.hpp"

namespace vsr {

namespace {

constexpr double kOpenMargin = 1e-9;

double standard_normal(std::mt19937_64& eng) {
  // Box-Muller on portable uniforms.
  double u1 = uniform01(eng);
  while (u1 <= 0.0) u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec ball_draw(std::mt19937_64& eng, std::size_t dim, double radius, bool sphere) {
  Vec v(dim, 0.0);
  if (dim == 0 || radius == 0.0) return v;
  double n = 0.0;
  do {
    for (auto& c : v) c = standard_normal(eng);
    n = norm(v);
  } while (n == 0.0);
  double r = radius;
  if (!sphere) r *= std::pow(uniform01(eng), 1.0 / static_cast<double>(dim));
  for (auto& c : v) c *= r / n;
  return v;
}

}  // namespace

std::vector<double> gen_sampling(const SamplingSpec& spec, std::uint64_t index) {
  if (!(spec.T_max > 0.0)) throw InvalidSpec("T_max must be positive");
  std::vector<double> out;
  switch (spec.mode) {
    case SamplingMode::Constant: {
      if (spec.length == 0) throw InvalidSpec("sequence length must be >= 1");
      if (!(spec.theta > 0.0 && spec.theta < 1.0))
        throw InvalidSpec("constant sampling fraction must lie in (0, 1)");
      out.assign(spec.length, spec.theta * spec.T_max);
      break;
    }
    case SamplingMode::IIDUniform: {
      if (spec.length == 0) throw InvalidSpec("sequence length must be >= 1");
      auto eng = make_engine(spec.seed, RngStream::Periods, index);
      const double lo = spec.T_max * kOpenMargin;
      const double hi = spec.T_max * (1.0 - kOpenMargin);
      out.resize(spec.length);
      for (auto& T : out) T = lo + (hi - lo) * uniform01(eng);
      break;
    }
    case SamplingMode::Explicit: {
      for (double T : spec.periods) {
        if (!(T > 0.0 && T < spec.T_max))
          throw InvalidSpec("explicit period " + std::to_string(T) +
                            " outside (0, T_max)");
      }
      out = spec.periods;
      if (out.empty()) throw InvalidSpec("explicit period list is empty");
      break;
    }
  }
  return out;
}

Vec sample_ball(std::size_t dim, double radius, bool on_sphere,
                std::uint64_t seed, RngStream stream, std::uint64_t index) {
  auto eng = make_engine(seed, stream, index);
  return ball_draw(eng, dim, radius, on_sphere);
}

std::vector<Vec> gen_errors(const ErrorSpec& spec, std::uint64_t index) {
  if (!(spec.bound >= 0.0)) throw InvalidSpec("error bound must be >= 0");
  const double slack = 1e-12 * std::max(1.0, spec.bound);
  std::vector<Vec> out;
  switch (spec.mode) {
    case ErrorMode::Zero:
      out.assign(spec.length, Vec(spec.dim, 0.0));
      break;
    case ErrorMode::ConstantVector:
      if (spec.constant.size() != spec.dim)
        throw InvalidSpec("constant error vector has wrong dimension");
      if (norm(spec.constant) > spec.bound + slack)
        throw InvalidSpec("constant error vector exceeds bound");
      out.assign(spec.length, spec.constant);
      break;
    case ErrorMode::IIDBall:
    case ErrorMode::IIDSphere: {
      auto eng = make_engine(spec.seed, RngStream::Errors, index);
      out.reserve(spec.length);
      for (std::size_t i = 0; i < spec.length; ++i)
        out.push_back(ball_draw(eng, spec.dim, spec.bound,
                                spec.mode == ErrorMode::IIDSphere));
      break;
    }
    case ErrorMode::WorstCaseList:
      for (const auto& e : spec.values) {
        if (e.size() != spec.dim)
          throw InvalidSpec("error list entry has wrong dimension");
        if (norm(e) > spec.bound + slack)
          throw InvalidSpec("error list entry exceeds bound");
      }
      out = spec.values;
      break;
  }
  return out;
}

Trajectory simulate(const ClosedLoopModel& model, std::span<const double> x0,
                    std::span<const double> periods, std::span<const Vec> errors,
                    double state_cap) {
  if (periods.size() != errors.size())
    throw InvalidSpec("period and error sequences differ in length");
  if (x0.size() != model.state_dim())
    throw InvalidSpec("initial state has wrong dimension");
  for (const auto& e : errors)
    if (e.size() != model.error_dim())
      throw InvalidSpec("error vector has wrong dimension");

  Trajectory traj;
  traj.periods.assign(periods.begin(), periods.end());
  traj.errors.assign(errors.begin(), errors.end());
  traj.states.reserve(periods.size() + 1);
  traj.elapsed.reserve(periods.size() + 1);
  traj.states.emplace_back(x0.begin(), x0.end());
  traj.elapsed.push_back(0.0);

  CompensatedSum clock;
  for (std::size_t k = 0; k < periods.size(); ++k) {
    Vec next;
    try {
      next = model(traj.states.back(), errors[k], periods[k]);
    } catch (const FiniteEscape& ex) {
      traj.diverged_at = k + 1;
      traj.divergence_reason = ex.what();
      break;
    }
    if (!all_finite(next) || norm(next) > state_cap) {
      traj.diverged_at = k + 1;
      traj.divergence_reason = all_finite(next) ? "state norm exceeded cap"
                                                : "non-finite state";
      break;
    }
    clock.add(periods[k]);
    traj.states.push_back(std::move(next));
    traj.elapsed.push_back(clock.value());
  }
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          std::size_t state_dim, std::size_t error_dim) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "k,t";
  for (std::size_t i = 1; i <= state_dim; ++i) os << ",x" << i;
  for (std::size_t i = 1; i <= error_dim; ++i) os << ",e" << i;
  os << ",T\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    os << k << ',' << num(traj.elapsed[k]);
    for (double v : traj.states[k]) os << ',' << num(v);
    const bool has_input = k < traj.periods.size();
    for (std::size_t i = 0; i < error_dim; ++i)
      os << ',' << (has_input ? num(traj.errors[k][i]) : std::string());
    os << ',' << (has_input ? num(traj.periods[k]) : std::string()) << '\n';
  }
  if (traj.diverged_at) os << "# diverged_at=" << *traj.diverged_at << '\n';
}

Scenario make_scenario(const EnsembleSpec& spec, std::size_t state_dim,
                       std::uint64_t index) {
  Scenario sc;
  bool sphere = spec.x0_mode == InitialMode::Sphere ||
                (spec.x0_mode == InitialMode::Alternating && index % 2 == 0);
  sc.x0 = sample_ball(state_dim, spec.x0_radius, sphere, spec.seed,
                      RngStream::InitialState, index);
  SamplingSpec s = spec.sampling;
  s.seed = spec.seed;
  sc.periods = gen_sampling(s, index);
  ErrorSpec e = spec.errors;
  e.seed = spec.seed;
  e.length = sc.periods.size();
  sc.errors = gen_errors(e, index);
  return sc;
}

std::vector<Trajectory> simulate_ensemble(const ClosedLoopModel& model,
                                          const EnsembleSpec& spec,
                                          unsigned workers) {
  return parallel_map<Trajectory>(spec.scenarios, workers, [&](std::size_t i) {
    const Scenario sc = make_scenario(spec, model.state_dim(), i);
    return simulate(model, sc.x0, sc.periods, sc.errors);
  });
}

}  // namespace vsr
