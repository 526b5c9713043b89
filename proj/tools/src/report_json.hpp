#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vsr/bounds.hpp"
#include "vsr/certifier.hpp"
#include "vsr/falsifier.hpp"
#include "vsr/trajectory.hpp"

// JSON views of library results. Infinite and NaN values become null.
namespace vsr::cli {

using json = nlohmann::json;

json to_json(const Witness& w);
json to_json(const GridStats& g);
json to_json(const CertificationReport& r);
json to_json(const StructuralReport& r);
json to_json(const EnvelopeReport& r);
json to_json(const ProbeTables& t);
json to_json(const ScenarioScore& s);
json to_json(const Scenario& s);

/// Throws ConfigError on malformed witness files.
Scenario scenario_from_json(const json& j);

/// Writes `arg,value` rows with round-trip precision.
void write_arg_value_csv(const std::string& path, std::span<const double> args,
                         std::span<const double> values);

void write_json(const std::string& path, const json& j);

}  // namespace vsr::cli
