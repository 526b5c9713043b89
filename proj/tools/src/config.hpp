#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace vsr::cli {

using json = nlohmann::json;

/// Bad flags, config files or option values; maps to exit code 64.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind { Text, Number, Integer, Flag, NumberList };

struct OptionSpec {
  std::string name;  // flag without dashes, also the config key
  Kind kind;
  json def;          // null: optional, absent unless given
  std::string help;
};

/// Value of a flag given on the command line.
json parse_flag(const OptionSpec& spec, const std::string& text);

/// Throws ConfigError unless `v` fits the option's kind.
void check_value(const OptionSpec& spec, const json& v);

std::vector<double> parse_number_list(const std::string& text);

/// Defaults, then the config file, then explicit flags. The config file is a
/// JSON object keyed by option name; an optional "command" entry must name
/// this subcommand.
json resolve(const std::vector<OptionSpec>& specs, const std::string& command,
             const std::optional<std::string>& config_path,
             const std::map<std::string, std::string>& flags);

}  // namespace vsr::cli
