#include "report_json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "config.hpp"

namespace vsr::cli {

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json opt(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

json vec(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

Vec vec_from(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string("witness field '") + what + "' must be an array");
  Vec v;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(std::string("witness field '") + what + "' must hold numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

}  // namespace

json to_json(const Witness& w) { return {{"x", vec(w.x)}, {"e", vec(w.e)}, {"T", num(w.T)}}; }

json to_json(const GridStats& g) {
  return {{"x_points", g.x_points},
          {"e_points", g.e_points},
          {"t_points", g.t_points},
          {"evaluated", g.evaluated},
          {"excluded_by_region", g.excluded_by_region},
          {"inconclusive", g.inconclusive},
          {"failed_evaluations", g.failed_evaluations},
          {"x_cell_radius", num(g.x_cell_radius)},
          {"e_cell_radius", num(g.e_cell_radius)},
          {"t_spacing", num(g.t_spacing)}};
}

json to_json(const CertificationReport& r) {
  json j = {{"verdict", std::string(to_string(r.verdict))},
            {"min_margin", num(r.min_margin)},
            {"witness", r.witness ? to_json(*r.witness) : json(nullptr)},
            {"grid", to_json(r.grid)},
            {"T_used", num(r.T_used)},
            {"T_max_certified", opt(r.T_max_certified)},
            {"caveats", r.caveats}};
  if (r.lipschitz_rigorous) j["lipschitz_rigorous"] = *r.lipschitz_rigorous;
  return j;
}

json to_json(const StructuralReport& r) {
  json delta = json::array(), C = json::array();
  for (const auto& d : r.delta_table)
    delta.push_back({{"eps", num(d.eps)}, {"delta", opt(d.delta)}, {"sup", num(d.sup)}});
  for (const auto& c : r.C_table) C.push_back({{"M", num(c.M)}, {"E", num(c.E)}, {"C", num(c.C)}});
  return {{"origin_residual", num(r.origin_residual)},
          {"T_probe", num(r.T_probe)},
          {"delta_table", delta},
          {"C_table", C},
          {"delta_monotone", r.delta_monotone},
          {"C_monotone", r.C_monotone},
          {"caveats", r.caveats}};
}

json to_json(const EnvelopeReport& r) {
  json v = json::array();
  for (const auto& x : r.violations)
    v.push_back({{"scenario", x.scenario},
                 {"k", x.k},
                 {"lhs", num(x.lhs)},
                 {"rhs", num(x.rhs)},
                 {"excess", num(x.excess)}});
  return {{"violations", v},
          {"violation_count", r.violation_count},
          {"checked_points", r.checked_points},
          {"max_excess", num(r.max_excess)},
          {"diverged_scenarios", r.diverged_scenarios}};
}

json to_json(const ProbeTables& t) {
  json d = json::array(), C = json::array(), a = json::array();
  for (const auto& x : t.delta) d.push_back({{"eps", num(x.eps)}, {"delta", opt(x.delta)}});
  for (const auto& x : t.C) C.push_back({{"L", num(x.L)}, {"C", num(x.C)}});
  for (const auto& x : t.attract) a.push_back({{"eps", num(x.eps)}, {"time", opt(x.time)}});
  return {{"delta", d}, {"C", C}, {"attract_time", a}, {"caveats", t.caveats}};
}

json to_json(const ScenarioScore& s) {
  return {{"k", s.k}, {"lhs", num(s.lhs)}, {"rhs", num(s.rhs)}, {"score", num(s.score)},
          {"violated", s.violated}};
}

json to_json(const Scenario& s) {
  json errors = json::array();
  for (const auto& e : s.errors) errors.push_back(vec(e));
  return {{"x0", vec(s.x0)}, {"periods", vec(s.periods)}, {"errors", errors}};
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("witness must be a JSON object");
  for (const char* key : {"x0", "periods", "errors"})
    if (!j.contains(key)) throw ConfigError(std::string("witness lacks '") + key + "'");
  Scenario s;
  s.x0 = vec_from(j["x0"], "x0");
  s.periods = vec_from(j["periods"], "periods");
  if (!j["errors"].is_array()) throw ConfigError("witness field 'errors' must be an array");
  for (const auto& e : j["errors"]) s.errors.push_back(vec_from(e, "errors"));
  return s;
}

void write_arg_value_csv(const std::string& path, std::span<const double> args,
                         std::span<const double> values) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  char buf[64];
  os << "arg,value\n";
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", args[i]);
    os << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", values[i]);
    os << buf << '\n';
  }
}

void write_json(const std::string& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  os << j.dump(2) << '\n';
}

}  // namespace vsr::cli
