#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>

#include "CLI11.hpp"
#include "config.hpp"
#include "report_json.hpp"
#include "vsr/bounds.hpp"
#include "vsr/certifier.hpp"
#include "vsr/cubic_example.hpp"
#include "vsr/errors.hpp"
#include "vsr/falsifier.hpp"
#include "vsr/grid.hpp"
#include "vsr/models.hpp"
#include "vsr/trajectory.hpp"

namespace vsr::cli {

namespace {

namespace fs = std::filesystem;

struct Context {
  fs::path out_dir;
  unsigned workers = 1;
  std::uint64_t seed = 0;
  std::ostream& out;
  std::ostream& err;

  std::string path(const std::string& name) const { return (out_dir / name).string(); }
};

using Handler = std::function<int(const json&, Context&)>;

struct Command {
  std::string name;
  std::string help;
  std::vector<OptionSpec> options;
  bool randomized;
  Handler handler;
};

// ---- config access ---------------------------------------------------------

double num(const json& c, const char* key) { return c.at(key).get<double>(); }
std::string text(const json& c, const char* key) { return c.at(key).get<std::string>(); }
std::size_t count(const json& c, const char* key) { return c.at(key).get<std::size_t>(); }
std::vector<double> list(const json& c, const char* key) {
  return c.at(key).get<std::vector<double>>();
}

double positive(const json& c, const char* key) {
  const double v = num(c, key);
  if (!(v > 0.0)) throw ConfigError(std::string("--") + key + " must be positive");
  return v;
}

double nonnegative(const json& c, const char* key) {
  const double v = num(c, key);
  if (!(v >= 0.0)) throw ConfigError(std::string("--") + key + " must be nonnegative");
  return v;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Field of a claim or certificate file.
template <class T>
T field(const json& j, const char* key, std::optional<T> fallback = std::nullopt) {
  if (!j.contains(key) || j[key].is_null()) {
    if (fallback) return *fallback;
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

DecreaseMode parse_mode(const std::string& m) {
  if (m == "rss") return DecreaseMode::RobustStability;
  if (m == "siss") return DecreaseMode::InputToState;
  throw ConfigError("mode must be rss or siss, got '" + m + "'");
}

/// Candidate from an object with V, alpha1..3 and optional rho.
LyapunovCandidate candidate_from(const json& j, std::size_t n, double M, double bound) {
  LyapunovCandidate c;
  c.V_text = field<std::string>(j, "V", std::string("pow(s,2)"));
  c.V = parse_lyapunov(c.V_text, n);
  c.alpha1 = ComparisonFn::from_expression(field<std::string>(j, "alpha1", std::string("pow(s,2)")));
  c.alpha2 = ComparisonFn::from_expression(field<std::string>(j, "alpha2", std::string("pow(s,2)")));
  c.alpha3 = ComparisonFn::from_expression(field<std::string>(j, "alpha3", std::string("pow(s,2)")));
  const auto rho = field<std::string>(j, "rho", std::string());
  if (!rho.empty()) c.rho = ComparisonFn::from_expression(rho);
  if (!(M >= 0.0) || !(bound >= 0.0)) throw ConfigError("radii must be nonnegative");
  c.M = M;
  c.bound = bound;
  return c;
}

ClosedLoopModel model_from(const json& j) {
  return make_model(field<std::string>(j, "model", std::string("cubic_example")),
                    field<std::string>(j, "controller", std::string()));
}

Claim claim_from(const json& c, const ClosedLoopModel& model, unsigned workers) {
  const auto type = field<std::string>(c, "type");
  const double T_bound = field<double>(c, "T_bound");
  if (!(T_bound > 0.0)) throw ConfigError("claim T_bound must be positive");
  if (type == "decrease") {
    DecreaseClaim d;
    d.mode = parse_mode(field<std::string>(c, "mode", std::string("rss")));
    d.cand = candidate_from(c, model.state_dim(), field<double>(c, "M", 1.0),
                            field<double>(c, "bound", 0.0));
    if (d.mode == DecreaseMode::InputToState && !d.cand.rho)
      throw ConfigError("siss decrease claims need rho");
    d.T_bound = T_bound;
    return d;
  }
  if (type != "envelope") throw ConfigError("claim type must be envelope or decrease");
  EnvelopeClaim e;
  e.M0 = field<double>(c, "M0", 1.0);
  e.E0 = field<double>(c, "E0", 0.0);
  e.R = field<double>(c, "R", 0.0);
  e.T_bound = T_bound;
  if (c.contains("certificate")) {
    const json& cert = c["certificate"];
    const DecreaseMode mode = parse_mode(field<std::string>(cert, "mode", std::string("rss")));
    const auto cand = candidate_from(cert, model.state_dim(), e.M0, e.E0);
    if (mode == DecreaseMode::InputToState && !cand.rho)
      throw ConfigError("siss certificates need rho");
    SigmaGrid sg;
    sg.T_bound = T_bound;
    sg.workers = workers;
    const auto g = construct_gains(model, cand, mode, e.M0, e.E0, sg);
    e.beta = g.beta;
    e.gamma = g.gamma;
  } else {
    e.beta = KLFn::from_expression(field<std::string>(c, "beta"));
    const auto gamma = field<std::string>(c, "gamma", std::string());
    if (!gamma.empty()) e.gamma = ComparisonFn::from_expression(gamma);
  }
  return e;
}

SamplingSpec sampling_from(const std::string& spec, double T_max, std::size_t length,
                           std::uint64_t seed) {
  SamplingSpec s;
  s.T_max = T_max;
  s.length = length;
  s.seed = seed;
  if (spec == "uniform") {
    s.mode = SamplingMode::IIDUniform;
  } else if (spec.rfind("constant:", 0) == 0) {
    s.mode = SamplingMode::Constant;
    s.theta = parse_number_list(spec.substr(9)).at(0);
  } else if (spec.rfind("explicit:", 0) == 0) {
    s.mode = SamplingMode::Explicit;
    s.periods = parse_number_list(spec.substr(9));
  } else {
    throw ConfigError("periods spec must be uniform, constant:<theta> or explicit:<T,...>");
  }
  return s;
}

ErrorSpec errors_from(const std::string& spec, double bound, std::size_t dim,
                      std::size_t length, std::uint64_t seed) {
  ErrorSpec e;
  e.bound = bound;
  e.dim = dim;
  e.length = length;
  e.seed = seed;
  if (spec == "zero") {
    e.mode = ErrorMode::Zero;
  } else if (spec == "ball") {
    e.mode = ErrorMode::IIDBall;
  } else if (spec == "sphere") {
    e.mode = ErrorMode::IIDSphere;
  } else if (spec.rfind("constant:", 0) == 0) {
    e.mode = ErrorMode::ConstantVector;
    e.constant = parse_number_list(spec.substr(9));
  } else {
    throw ConfigError("errors spec must be zero, ball, sphere or constant:<v,...>");
  }
  return e;
}

InitialMode initial_mode(const std::string& m) {
  if (m == "ball") return InitialMode::Ball;
  if (m == "sphere") return InitialMode::Sphere;
  if (m == "alternating") return InitialMode::Alternating;
  throw ConfigError("x0 mode must be ball, sphere or alternating");
}

BallGridSpec ball_grid(const json& c, std::uint64_t seed) {
  BallGridSpec g;
  g.points_per_axis = count(c, "grid-points");
  g.lhs_samples = count(c, "lhs-samples");
  g.seed = seed;
  if (g.points_per_axis < 2 || g.lhs_samples == 0) throw ConfigError("grid too small");
  return g;
}

int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::CertifiedOnGrid: return kOk;
    case Verdict::ViolatedAt: return kViolation;
    case Verdict::Inconclusive: return kInconclusive;
  }
  return kInternalError;
}

int worst_exit(int a, int b) {
  if (a == kViolation || b == kViolation) return kViolation;
  return std::max(a, b);
}

void emit(Context& ctx, const std::string& file, const json& report) {
  write_json(ctx.path(file), report);
  ctx.out << report.dump(2) << '\n';
}

// ---- subcommands -----------------------------------------------------------

int cmd_simulate(const json& c, Context& ctx) {
  json report;
  Scenario sc;
  std::optional<ClosedLoopModel> model;
  std::optional<ScenarioScore> replayed;
  const std::string witness = text(c, "witness");
  if (!witness.empty()) {
    const json w = read_json_file(witness);
    model = w.contains("model") ? model_from(w) : make_model(text(c, "model"), text(c, "controller"));
    sc = scenario_from_json(w);
    if (sc.x0.size() != model->state_dim()) throw ConfigError("witness x0 has wrong dimension");
    if (w.contains("claim")) {
      replayed = replay(*model, claim_from(w["claim"], *model, ctx.workers), sc);
      report["replay"] = to_json(*replayed);
    }
    report["witness"] = witness;
  } else {
    model = make_model(text(c, "model"), text(c, "controller"));
    sc.x0 = list(c, "x0");
    if (sc.x0.size() != model->state_dim())
      throw ConfigError("--x0 needs " + std::to_string(model->state_dim()) + " components");
    const auto ss = sampling_from(text(c, "periods-spec"), positive(c, "T-max"),
                                  count(c, "K-steps"), ctx.seed);
    sc.periods = gen_sampling(ss);
    sc.errors = gen_errors(errors_from(text(c, "errors-spec"), nonnegative(c, "E"),
                                       model->error_dim(), sc.periods.size(), ctx.seed));
  }
  const Trajectory tr = simulate(*model, sc.x0, sc.periods, sc.errors, positive(c, "state-cap"));
  const std::string csv = text(c, "out");
  {
    std::ofstream os(ctx.path(csv));
    if (!os) throw ConfigError("cannot write " + ctx.path(csv));
    write_trajectory_csv(os, tr, model->state_dim(), model->error_dim());
  }
  report["model"] = model->name();
  report["steps"] = tr.states.size() - 1;
  report["elapsed"] = tr.elapsed.back();
  report["final_state"] = tr.states.back();
  report["diverged_at"] = tr.diverged_at ? json(*tr.diverged_at) : json(nullptr);
  if (tr.diverged_at) report["divergence_reason"] = tr.divergence_reason;
  report["trajectory_csv"] = csv;
  emit(ctx, "simulate.json", report);
  return replayed && replayed->violated ? kViolation : kOk;
}

int cmd_certify(const json& c, Context& ctx) {
  const ClosedLoopModel model = make_model(text(c, "model"), text(c, "controller"));
  const DecreaseMode mode = parse_mode(text(c, "mode"));
  const double bound = mode == DecreaseMode::InputToState ? nonnegative(c, "E") : nonnegative(c, "D");
  json spec = {{"V", c["V"]}, {"alpha1", c["alpha1"]}, {"alpha2", c["alpha2"]},
               {"alpha3", c["alpha3"]}, {"rho", c["rho"]}};
  const auto cand = candidate_from(spec, model.state_dim(), nonnegative(c, "M"), bound);
  if (mode == DecreaseMode::InputToState && !cand.rho) throw ConfigError("--mode siss needs --rho");

  DecreaseGrid grid;
  grid.x = ball_grid(c, ctx.seed);
  grid.e = grid.x;
  grid.t_points = count(c, "t-points");
  grid.workers = ctx.workers;
  if (!c["lipschitz"].is_null()) grid.lipschitz = positive(c, "lipschitz");
  if (grid.t_points == 0) throw ConfigError("--t-points must be positive");

  const auto sandwich = check_sandwich(cand, model.state_dim(), grid.x);
  json cert = {{"command", "certify"},     {"model", c["model"]},   {"controller", c["controller"]},
               {"mode", c["mode"]},        {"V", cand.V_text},      {"alpha1", c["alpha1"]},
               {"alpha2", c["alpha2"]},    {"alpha3", c["alpha3"]}, {"rho", c["rho"]},
               {"M", cand.M},              {"bound", bound},        {"sandwich", to_json(sandwich)}};
  int code = verdict_exit(sandwich.verdict);
  if (c["scan"].get<bool>()) {
    PeriodScan scan{positive(c, "T-hi"), count(c, "coarse"), positive(c, "refine-tol")};
    try {
      const auto res = max_sampling_period(model, cand, mode, scan, grid);
      cert["T_bound"] = res.T_max_certified;
      cert["decrease"] = to_json(res.report);
      code = worst_exit(code, verdict_exit(res.report.verdict));
    } catch (const NoneCertified& e) {
      cert["T_bound"] = nullptr;
      cert["decrease"] = {{"verdict", "ViolatedAt"}, {"caveats", {e.what()}}};
      code = kViolation;
    }
  } else {
    const double T = positive(c, "T-bound");
    const auto rep = certify_decrease(model, cand, mode, T, grid);
    cert["T_bound"] = T;
    cert["decrease"] = to_json(rep);
    code = worst_exit(code, verdict_exit(rep.verdict));
  }
  emit(ctx, "certificate.json", cert);
  return code;
}

int cmd_structural(const json& c, Context& ctx) {
  const ClosedLoopModel model = make_model(text(c, "model"), text(c, "controller"));
  StructuralSpec s;
  s.T_probe = positive(c, "T-probe");
  s.t_points = count(c, "t-points");
  s.eps_grid = list(c, "eps-grid");
  s.delta_candidates = list(c, "delta-candidates");
  s.M_grid = list(c, "M-grid");
  s.E_grid = list(c, "E-grid");
  s.points_per_axis = count(c, "grid-points");
  s.lhs_samples = count(c, "lhs-samples");
  s.seed = ctx.seed;
  s.workers = ctx.workers;
  for (const auto* l : {&s.eps_grid, &s.delta_candidates, &s.M_grid, &s.E_grid})
    for (double v : *l)
      if (!(v >= 0.0)) throw ConfigError("structural grids must be nonnegative");
  if (s.t_points == 0) throw ConfigError("--t-points must be positive");
  json report;
  int code = kOk;
  try {
    const auto rep = check_structural(model, s);
    report = to_json(rep);
    if (!rep.delta_monotone || !rep.C_monotone) code = kInconclusive;
  } catch (const OriginNotFixed& e) {
    report = {{"origin_residual", e.residual()}, {"error", e.what()}};
    code = kViolation;
  }
  report["model"] = model.name();
  emit(ctx, "structural.json", report);
  return code;
}

int cmd_bounds(const json& c, Context& ctx) {
  const std::string path = text(c, "from-certificate");
  if (path.empty()) throw ConfigError("bounds needs --from-certificate");
  const json cert = read_json_file(path);
  const ClosedLoopModel model = model_from(cert);
  const DecreaseMode mode = parse_mode(field<std::string>(cert, "mode"));
  const auto cand = candidate_from(cert, model.state_dim(), field<double>(cert, "M"),
                                   field<double>(cert, "bound"));
  const double M0 = c["M0"].is_null() ? cand.M : nonnegative(c, "M0");
  const double E0 = mode == DecreaseMode::RobustStability
                        ? 0.0
                        : (c["E0"].is_null() ? cand.bound : nonnegative(c, "E0"));
  double T_bound;
  if (!c["T-bound"].is_null())
    T_bound = positive(c, "T-bound");
  else if (cert.contains("T_bound") && cert["T_bound"].is_number())
    T_bound = cert["T_bound"].get<double>();
  else
    throw ConfigError("certificate carries no T_bound; pass --T-bound");

  SigmaGrid sg;
  sg.T_bound = T_bound;
  sg.workers = ctx.workers;
  const std::size_t sp = count(c, "sigma-points");
  if (sp == 0) throw ConfigError("--sigma-points must be positive");
  const double s_max = E0 > 0.0 ? E0 : 1e-3;
  for (std::size_t j = 1; j <= sp; ++j)
    sg.s_grid.push_back(s_max * static_cast<double>(j) / static_cast<double>(sp));
  const auto g = construct_gains(model, cand, mode, M0, E0, sg);

  std::vector<std::string> caveats;
  if (field<std::string>(cert["decrease"], "verdict", std::string()) != "CertifiedOnGrid")
    caveats.push_back("certificate decrease verdict is not CertifiedOnGrid");
  if (g.M > cand.M * (1 + 1e-12))
    caveats.push_back("inflated radius " + std::to_string(g.M) +
                      " exceeds the certified radius " + std::to_string(cand.M));

  EnsembleSpec es;
  es.scenarios = count(c, "ensemble");
  es.x0_radius = M0;
  es.x0_mode = initial_mode(text(c, "x0-mode"));
  es.sampling.mode = SamplingMode::IIDUniform;
  es.sampling.T_max = T_bound;
  es.sampling.length = count(c, "K-steps");
  es.errors = errors_from(E0 > 0.0 ? text(c, "errors-spec") : "zero", E0, model.error_dim(),
                          es.sampling.length, ctx.seed);
  es.seed = ctx.seed;
  const auto trs = simulate_ensemble(model, es, ctx.workers);
  EnvelopeOptions eo;
  eo.workers = ctx.workers;
  const auto env = envelope_check(trs, g.beta, g.gamma, nonnegative(c, "R"), eo);

  json report = {{"certificate", path},
                 {"mode", std::string(to_string(mode))},
                 {"M0", M0},
                 {"E0", E0},
                 {"T_bound", T_bound},
                 {"M_inflated", g.M},
                 {"tbar", g.tbar},
                 {"beta", g.beta.describe()},
                 {"gamma", g.gamma ? json(g.gamma->describe()) : json(nullptr)},
                 {"envelope", to_json(env)},
                 {"caveats", caveats}};
  std::vector<double> ts = linspace(0.0, T_bound * static_cast<double>(es.sampling.length), 101);
  write_arg_value_csv(ctx.path("beta_M0.csv"), ts, g.beta.eval_along(M0, ts));
  if (g.sigma) {
    const auto& s = *g.sigma;
    write_arg_value_csv(ctx.path("sigma.csv"), s.s, s.sigma);
    write_arg_value_csv(ctx.path("zeta.csv"), s.s, s.zeta_knots);
    std::vector<double> eta, gamma;
    for (double x : s.s) {
      eta.push_back(s.eta(x));
      gamma.push_back((*g.gamma)(x));
    }
    write_arg_value_csv(ctx.path("eta.csv"), s.s, eta);
    write_arg_value_csv(ctx.path("gamma.csv"), s.s, gamma);
    report["sigma_caveats"] = s.caveats;
  }
  emit(ctx, "bounds.json", report);
  return env.violation_count ? kViolation : kOk;
}

int cmd_falsify(const json& c, Context& ctx) {
  const std::string path = text(c, "claim");
  if (path.empty()) throw ConfigError("falsify needs --claim");
  const json cj = read_json_file(path);
  const ClosedLoopModel model = model_from(cj);
  const Claim claim = claim_from(cj, model, ctx.workers);
  SearchBudget b;
  b.restarts = count(c, "budget");
  b.local_iterations = count(c, "iterations");
  b.horizon = count(c, "K-steps");
  b.seed = ctx.seed;
  b.workers = ctx.workers;
  if (b.restarts == 0 || b.horizon == 0) throw ConfigError("budget and horizon must be positive");
  const auto res = falsify(model, claim, b);

  json report = {{"claim", path},
                 {"found", res.witness.has_value()},
                 {"best_score", std::isfinite(res.best_score) ? json(res.best_score) : json(nullptr)},
                 {"scenarios_evaluated", res.scenarios_evaluated}};
  if (res.witness) {
    const auto& w = *res.witness;
    json wj = to_json(w.scenario);
    wj["model"] = field<std::string>(cj, "model", std::string("cubic_example"));
    wj["controller"] = field<std::string>(cj, "controller", std::string());
    wj["claim"] = cj;
    wj["violation"] = to_json(w.violation);
    wj["restart"] = w.restart;
    const std::string out = text(c, "out");
    write_json(ctx.path(out), wj);
    report["witness"] = out;
    report["violation"] = to_json(w.violation);
  }
  emit(ctx, "falsify.json", report);
  return res.witness ? kViolation : kOk;
}

int cmd_probe(const json& c, Context& ctx) {
  const ClosedLoopModel model = make_model(text(c, "model"), text(c, "controller"));
  ProbeSpec s;
  s.M = positive(c, "M");
  s.D = nonnegative(c, "D");
  s.T_probe = positive(c, "T-probe");
  s.eps_grid = list(c, "eps-grid");
  s.L_grid = list(c, "L-grid");
  s.delta_candidates = list(c, "delta-candidates");
  s.scenarios = count(c, "scenarios");
  s.horizon = count(c, "K-steps");
  s.seed = ctx.seed;
  s.workers = ctx.workers;
  const auto t = stability_probe(model, s);
  std::vector<double> a, v;
  for (const auto& d : t.delta) {
    a.push_back(d.eps);
    v.push_back(d.delta.value_or(std::nan("")));
  }
  write_arg_value_csv(ctx.path("delta.csv"), a, v);
  a.clear(), v.clear();
  for (const auto& d : t.C) {
    a.push_back(d.L);
    v.push_back(d.C);
  }
  write_arg_value_csv(ctx.path("C.csv"), a, v);
  a.clear(), v.clear();
  for (const auto& d : t.attract) {
    a.push_back(d.eps);
    v.push_back(d.time.value_or(std::numeric_limits<double>::infinity()));
  }
  write_arg_value_csv(ctx.path("attract_time.csv"), a, v);
  json report = to_json(t);
  report["model"] = model.name();
  emit(ctx, "probe.json", report);
  return kOk;
}

int cmd_example(const json& c, Context& ctx) {
  const double M = nonnegative(c, "M");
  const double K = positive(c, "K");
  example::ExampleGrid grid{count(c, "x-points"), count(c, "e-points"), count(c, "t-points"),
                            ctx.workers};
  if (!grid.x_points || !grid.e_points || !grid.t_points) throw ConfigError("example grid too small");
  const auto ex = example::verify_example(M, K, grid);
  json report = {{"M", M},
                 {"K", K},
                 {"coefficients",
                  {{"a", ex.coeffs.a}, {"b", ex.coeffs.b}, {"c", ex.coeffs.c}, {"d", ex.coeffs.d}}},
                 {"ttilde", ex.ttilde},
                 {"certification", to_json(ex.report)},
                 {"max_route_gap", ex.max_route_gap}};
  {
    std::ofstream os(ctx.path("coefficients.csv"));
    if (!os) throw ConfigError("cannot write coefficients.csv");
    char buf[64];
    os << "name,value\n";
    for (auto [n, v] : {std::pair{"a", ex.coeffs.a}, {"b", ex.coeffs.b}, {"c", ex.coeffs.c},
                        {"d", ex.coeffs.d}, {"ttilde", ex.ttilde}}) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << n << ',' << buf << '\n';
    }
  }
  int code = verdict_exit(ex.report.verdict);

  const std::size_t scenarios = count(c, "ensemble");
  if (scenarios > 0 && M > 0.0) {
    const double T = c["T-ensemble"].is_null() ? ex.ttilde : positive(c, "T-ensemble");
    const double E0 = K * M;
    const ClosedLoopModel model = example::example_closed_loop();
    const auto cand = example::example_candidate(M, K);
    SigmaGrid sg;
    sg.T_bound = T;
    sg.workers = ctx.workers;
    const auto g = construct_gains(model, cand, DecreaseMode::InputToState, M, E0, sg);
    EnsembleSpec es;
    es.scenarios = scenarios;
    es.x0_radius = M;
    es.x0_mode = InitialMode::Alternating;
    es.sampling.T_max = T;
    es.sampling.length = count(c, "K-steps");
    es.errors = errors_from("ball", E0, 1, es.sampling.length, ctx.seed);
    es.seed = ctx.seed;
    const auto trs = simulate_ensemble(model, es, ctx.workers);
    EnvelopeOptions eo;
    eo.workers = ctx.workers;
    const auto env = envelope_check(trs, g.beta, g.gamma, 0.0, eo);
    report["ensemble"] = {{"scenarios", scenarios},
                          {"T_max", T},
                          {"E0", E0},
                          {"M_inflated", g.M},
                          {"envelope", to_json(env)}};
    if (env.violation_count) code = kViolation;
  }
  emit(ctx, "example.json", report);
  return code;
}

// ---- option tables ---------------------------------------------------------

OptionSpec opt(std::string name, Kind kind, json def, std::string help) {
  return OptionSpec{std::move(name), kind, std::move(def), std::move(help)};
}

std::vector<OptionSpec> model_options() {
  return {opt("model", Kind::Text, "cubic_example", "model reference"),
          opt("controller", Kind::Text, "", "controller components over x*, e*, T")};
}

std::vector<Command> commands() {
  using K = Kind;
  const json none = nullptr;
  std::vector<Command> cmds;

  auto sim = model_options();
  sim.insert(sim.end(),
             {opt("x0", K::NumberList, json::array({1.0}), "initial state"),
              opt("periods-spec", K::Text, "uniform", "uniform | constant:<theta> | explicit:<T,...>"),
              opt("T-max", K::Number, 0.06, "sampling periods lie in (0, T-max)"),
              opt("errors-spec", K::Text, "zero", "zero | ball | sphere | constant:<v,...>"),
              opt("E", K::Number, 0.0, "error bound"),
              opt("K-steps", K::Integer, 200, "number of steps"),
              opt("state-cap", K::Number, 1e9, "state norm treated as divergence"),
              opt("out", K::Text, "trajectory.csv", "trajectory CSV name in the output directory"),
              opt("witness", K::Text, "", "replay a witness file instead of sampling")});
  cmds.push_back({"simulate", "iterate the closed loop", sim, true, cmd_simulate});

  auto cert = model_options();
  cert.insert(cert.end(),
              {opt("mode", K::Text, "rss", "rss | siss"),
               opt("V", K::Text, "pow(s,2)", "Lyapunov candidate over s = |x| and x1..xn"),
               opt("alpha1", K::Text, "pow(s,2)", "lower sandwich bound"),
               opt("alpha2", K::Text, "pow(s,2)", "upper sandwich bound"),
               opt("alpha3", K::Text, "pow(s,2)", "decrease rate"),
               opt("rho", K::Text, "", "dead-zone gain (siss)"),
               opt("M", K::Number, 1.0, "state radius"),
               opt("E", K::Number, 0.0, "measurement-error bound (siss)"),
               opt("D", K::Number, 0.0, "disturbance bound (rss)"),
               opt("T-bound", K::Number, 0.1, "periods lie in (0, T-bound)"),
               opt("grid-points", K::Integer, 33, "points per axis"),
               opt("lhs-samples", K::Integer, 4096, "samples above two dimensions"),
               opt("t-points", K::Integer, 32, "periods per sweep"),
               opt("scan", K::Flag, false, "search the largest certified period"),
               opt("T-hi", K::Number, 1.0, "upper end of the period scan"),
               opt("coarse", K::Integer, 32, "coarse scan points"),
               opt("refine-tol", K::Number, 1e-4, "bisection tolerance"),
               opt("lipschitz", K::Number, none, "Lipschitz constant of the margin")});
  cmds.push_back({"certify", "check a Lyapunov certificate on a grid", cert, false, cmd_certify});

  auto st = model_options();
  st.insert(st.end(),
            {opt("T-probe", K::Number, 0.05, "periods lie in (0, T-probe)"),
             opt("t-points", K::Integer, 32, "periods probed"),
             opt("eps-grid", K::NumberList, json::array({0.01, 0.05, 0.1, 0.5, 1.0}), "eps values"),
             opt("delta-candidates", K::NumberList, json::array(), "delta candidates (empty: 1e-4..1)"),
             opt("M-grid", K::NumberList, json::array({0.5, 1.0, 2.0}), "state radii"),
             opt("E-grid", K::NumberList, json::array({0.0, 0.05, 0.1}), "error radii"),
             opt("grid-points", K::Integer, 41, "points per axis"),
             opt("lhs-samples", K::Integer, 2048, "samples above two dimensions")});
  cmds.push_back({"structural", "origin, continuity and boundedness checks", st, false, cmd_structural});

  cmds.push_back({"bounds",
                  "build an envelope from a certificate and check an ensemble",
                  {opt("from-certificate", K::Text, "", "certificate written by certify"),
                   opt("ensemble", K::Integer, 1000, "scenarios"),
                   opt("K-steps", K::Integer, 200, "steps per scenario"),
                   opt("R", K::Number, 0.0, "practical offset"),
                   opt("M0", K::Number, none, "initial-state radius (default: certificate M)"),
                   opt("E0", K::Number, none, "error radius (default: certificate bound)"),
                   opt("T-bound", K::Number, none, "period bound (default: certificate T_bound)"),
                   opt("x0-mode", K::Text, "ball", "ball | sphere | alternating"),
                   opt("errors-spec", K::Text, "sphere", "zero | ball | sphere"),
                   opt("sigma-points", K::Integer, 24, "sigma table size")},
                  true,
                  cmd_bounds});

  cmds.push_back({"falsify",
                  "search for a counterexample to a claim",
                  {opt("claim", K::Text, "", "claim JSON file"),
                   opt("budget", K::Integer, 1000, "random restarts"),
                   opt("iterations", K::Integer, 200, "hill-climbing iterations"),
                   opt("K-steps", K::Integer, 200, "scenario horizon"),
                   opt("out", K::Text, "witness.json", "witness file name")},
                  true,
                  cmd_falsify});

  auto pr = model_options();
  pr.insert(pr.end(),
            {opt("M", K::Number, 1.0, "initial-state radius"),
             opt("D", K::Number, 0.0, "disturbance bound"),
             opt("T-probe", K::Number, 0.05, "periods lie in (0, T-probe)"),
             opt("eps-grid", K::NumberList, json::array({0.01, 0.05, 0.1, 0.5}), "eps values"),
             opt("L-grid", K::NumberList, json::array({0.5, 1.0, 2.0, 5.0}), "elapsed-time limits"),
             opt("delta-candidates", K::NumberList, json::array(), "initial radii (empty: 1e-4..M)"),
             opt("scenarios", K::Integer, 200, "scenarios per radius"),
             opt("K-steps", K::Integer, 200, "steps per scenario")});
  cmds.push_back({"probe", "empirical delta, C and attraction-time tables", pr, true, cmd_probe});

  cmds.push_back({"example",
                  "cubic Euler example: coefficients, Ttilde, certification, ensemble",
                  {opt("M", K::Number, 1.0, "state radius"),
                   opt("K", K::Number, 0.025, "gain-margin parameter"),
                   opt("x-points", K::Integer, 2001, "x grid"),
                   opt("e-points", K::Integer, 101, "e grid per x"),
                   opt("t-points", K::Integer, 64, "periods in (0, Ttilde)"),
                   opt("ensemble", K::Integer, 1000, "envelope scenarios (0: skip)"),
                   opt("K-steps", K::Integer, 200, "steps per scenario"),
                   opt("T-ensemble", K::Number, none, "ensemble period bound (default: Ttilde)")},
                  true,
                  cmd_example});
  return cmds;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto cmds = commands();
  CLI::App app{"Sampled-data stability certification under varying sampling periods", "vsrcert"};
  app.require_subcommand(1);
  app.fallthrough(false);

  struct Bound {
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> opts;
    std::string config;
    CLI::App* sub = nullptr;
  };
  std::vector<Bound> bound(cmds.size());
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    auto& cmd = cmds[i];
    auto& b = bound[i];
    cmd.options.push_back(opt("out-dir", Kind::Text, "out", "output directory"));
    cmd.options.push_back(opt("workers", Kind::Integer, 1, "worker threads"));
    cmd.options.push_back(opt("seed", Kind::Integer,
                              cmd.randomized ? json(nullptr) : json(0), "random seed"));
    b.sub = app.add_subcommand(cmd.name, cmd.help);
    b.sub->add_option("--config", b.config, "JSON config; flags override it");
    for (const auto& o : cmd.options) {
      if (o.kind == Kind::Flag)
        b.opts[o.name] = b.sub->add_flag("--" + o.name, o.help);
      else
        b.opts[o.name] = b.sub->add_option("--" + o.name, b.values[o.name], o.help);
    }
  }

  std::vector<std::string> argv_store{"vsrcert"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  std::size_t which = cmds.size();
  for (std::size_t i = 0; i < cmds.size(); ++i)
    if (bound[i].sub->parsed()) which = i;
  if (which == cmds.size()) {
    err << "no subcommand given\n";
    return kConfigError;
  }
  const Command& cmd = cmds[which];
  const Bound& b = bound[which];

  try {
    std::map<std::string, std::string> flags;
    for (const auto& [name, o] : b.opts)
      if (o->count() > 0) flags[name] = b.values.count(name) ? b.values.at(name) : "true";
    json cfg = resolve(cmd.options, cmd.name,
                       b.config.empty() ? std::nullopt : std::optional<std::string>(b.config), flags);
    if (cfg["seed"].is_null()) cfg["seed"] = std::random_device{}() | (std::uint64_t{std::random_device{}()} << 32);
    const auto workers = cfg["workers"].get<std::uint64_t>();
    if (workers == 0 || workers > 1024) throw ConfigError("--workers must lie in 1..1024");

    Context ctx{cfg["out-dir"].get<std::string>(), static_cast<unsigned>(workers),
                cfg["seed"].get<std::uint64_t>(), out, err};
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) throw ConfigError("cannot create " + ctx.out_dir.string() + ": " + ec.message());
    json echo = cfg;
    echo["command"] = cmd.name;
    write_json(ctx.path(cmd.name + ".config.json"), echo);
    return cmd.handler(cfg, ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidSpec& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainMismatch& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const EmptyDomain& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace vsr::cli
