#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace vsr::cli {

namespace {

double to_number(const std::string& name, const std::string& text) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("--" + name + ": '" + text + "' is not a number");
  }
  if (used != text.size()) throw ConfigError("--" + name + ": '" + text + "' is not a number");
  return v;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  if (text.empty()) return out;
  while (true) {
    const auto pos = text.find(',', start);
    std::string part = text.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    part.erase(0, part.find_first_not_of(' '));
    part.erase(part.find_last_not_of(' ') + 1);
    out.push_back(to_number("list", part));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

json parse_flag(const OptionSpec& spec, const std::string& text) {
  switch (spec.kind) {
    case Kind::Text:
      return text;
    case Kind::Number:
      return to_number(spec.name, text);
    case Kind::Integer: {
      if (text.empty() || !std::all_of(text.begin(), text.end(), ::isdigit))
        throw ConfigError("--" + spec.name + ": '" + text + "' is not a nonnegative integer");
      try {
        return std::stoull(text);
      } catch (const std::exception&) {
        throw ConfigError("--" + spec.name + ": '" + text + "' is out of range");
      }
    }
    case Kind::Flag:
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw ConfigError("--" + spec.name + " takes true or false");
    case Kind::NumberList:
      try {
        return parse_number_list(text);
      } catch (const ConfigError&) {
        throw ConfigError("--" + spec.name + ": '" + text + "' is not a comma-separated number list");
      }
  }
  return nullptr;
}

void check_value(const OptionSpec& spec, const json& v) {
  const std::string where = "option '" + spec.name + "'";
  if (v.is_null()) {
    if (!spec.def.is_null()) throw ConfigError(where + " may not be null");
    return;
  }
  switch (spec.kind) {
    case Kind::Text:
      if (!v.is_string()) throw ConfigError(where + " must be a string");
      return;
    case Kind::Number:
      if (!v.is_number() || !std::isfinite(v.get<double>()))
        throw ConfigError(where + " must be a finite number");
      return;
    case Kind::Integer:
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigError(where + " must be a nonnegative integer");
      return;
    case Kind::Flag:
      if (!v.is_boolean()) throw ConfigError(where + " must be true or false");
      return;
    case Kind::NumberList:
      if (!v.is_array()) throw ConfigError(where + " must be an array of numbers");
      for (const auto& x : v)
        if (!x.is_number()) throw ConfigError(where + " must be an array of numbers");
      return;
  }
}

json resolve(const std::vector<OptionSpec>& specs, const std::string& command,
             const std::optional<std::string>& config_path,
             const std::map<std::string, std::string>& flags) {
  json cfg = json::object();
  for (const auto& s : specs) cfg[s.name] = s.def;

  auto find = [&](const std::string& key) -> const OptionSpec* {
    for (const auto& s : specs)
      if (s.name == key) return &s;
    return nullptr;
  };

  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw ConfigError("cannot read config file " + *config_path);
    json file;
    try {
      file = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + *config_path + ": " + e.what());
    }
    if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (key == "command") {
        if (value != command)
          throw ConfigError("config file is for '" + value.dump() + "', not '" + command + "'");
        continue;
      }
      const OptionSpec* s = find(key);
      if (!s) throw ConfigError("unknown config key '" + key + "' for " + command);
      check_value(*s, value);
      cfg[key] = value;
    }
  }
  for (const auto& [key, text] : flags) {
    const OptionSpec* s = find(key);
    if (!s) throw ConfigError("unknown option --" + key);
    cfg[key] = parse_flag(*s, text);
  }
  for (const auto& s : specs) check_value(s, cfg[s.name]);
  return cfg;
}

}  // namespace vsr::cli
