//
// Copyright 2026 The noisy-instruct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "noisy/cli.h"
#include "noisy/digest.h"
#include "noisy/errors.h"
#include "noisy/textseg.h"

namespace noisy::cli {

using nlohmann::json;

namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> SplitList(std::string_view s) {
  std::vector<std::string> parts;
  std::stringstream in{std::string(s)};
  std::string part;
  while (std::getline(in, part, ',')) {
    part = Trim(part);
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

[[noreturn]] void Bad(const std::string& key, const std::string& why) {
  throw ConfigError("setting \"" + key + "\": " + why);
}

std::string AsString(const std::string& key, const json& v) {
  if (!v.is_string()) Bad(key, "expected a string");
  return v.get<std::string>();
}

double ParseDouble(const std::string& key, const std::string& text) {
  try {
    size_t used = 0;
    const double d = std::stod(text, &used);
    if (used != text.size()) Bad(key, "not a number: " + text);
    return d;
  } catch (const std::logic_error&) {
    Bad(key, "not a number: " + text);
  }
}

double AsDouble(const std::string& key, const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return ParseDouble(key, Trim(v.get<std::string>()));
  Bad(key, "expected a number");
}

uint64_t ParseUint(const std::string& key, const std::string& text) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), ::isdigit)) {
    Bad(key, "not a non-negative integer: " + text);
  }
  try {
    return std::stoull(text);
  } catch (const std::logic_error&) {
    Bad(key, "integer out of range: " + text);
  }
}

uint64_t AsUint(const std::string& key, const json& v) {
  if (v.is_number_unsigned()) return v.get<uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<int64_t>() < 0) Bad(key, "must not be negative");
    return static_cast<uint64_t>(v.get<int64_t>());
  }
  if (v.is_string()) return ParseUint(key, Trim(v.get<std::string>()));
  Bad(key, "expected a non-negative integer");
}

bool AsBool(const std::string& key, const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const std::string s = AsciiLower(Trim(v.get<std::string>()));
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  }
  Bad(key, "expected a boolean");
}

std::vector<double> AsDoubleList(const std::string& key, const json& v) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const json& e : v) out.push_back(AsDouble(key, e));
  } else if (v.is_string()) {
    for (const auto& part : SplitList(v.get<std::string>())) {
      out.push_back(ParseDouble(key, part));
    }
  } else {
    out.push_back(AsDouble(key, v));
  }
  if (out.empty()) Bad(key, "empty list");
  return out;
}

std::vector<PerturbationStrategy> AsStrategies(const std::string& key, const json& v) {
  std::vector<std::string> names;
  if (v.is_array()) {
    for (const json& e : v) names.push_back(AsString(key, e));
  } else {
    names = SplitList(AsString(key, v));
  }
  if (names.size() == 1 && names[0] == "all") {
    return {kAllStrategies.begin(), kAllStrategies.end()};
  }
  std::vector<PerturbationStrategy> out;
  for (const auto& name : names) {
    const auto s = ParseStrategy(name);
    if (!s) Bad(key, "unknown strategy \"" + name + "\"");
    if (std::find(out.begin(), out.end(), *s) != out.end()) {
      Bad(key, "strategy listed twice: " + name);
    }
    out.push_back(*s);
  }
  return out;
}

std::vector<TypoKind> AsTypoKinds(const std::string& key, const json& v) {
  std::vector<std::string> names;
  if (v.is_array()) {
    for (const json& e : v) names.push_back(AsString(key, e));
  } else {
    names = SplitList(AsString(key, v));
  }
  if (names.size() == 1 && names[0] == "all") {
    return {kAllTypoKinds.begin(), kAllTypoKinds.end()};
  }
  std::vector<TypoKind> out;
  for (const auto& name : names) {
    const auto k = ParseTypoKind(name);
    if (!k) Bad(key, "unknown typo kind \"" + name + "\"");
    if (std::find(out.begin(), out.end(), *k) != out.end()) {
      Bad(key, "typo kind listed twice: " + name);
    }
    out.push_back(*k);
  }
  if (out.empty()) Bad(key, "at least one typo kind is required");
  return out;
}

std::map<std::string, size_t> AsExpectCounts(const std::string& key, const json& v) {
  std::map<std::string, size_t> out;
  const auto check_name = [&](const std::string& name) {
    if (name != "total" && !ParseDatasetTag(name)) {
      Bad(key, "unknown count name \"" + name + "\" (use total or a dataset tag)");
    }
  };
  if (v.is_object()) {
    for (const auto& [name, n] : v.items()) {
      check_name(name);
      out[name] = AsUint(key, n);
    }
  } else if (v.is_string()) {
    for (const auto& part : SplitList(v.get<std::string>())) {
      const auto eq = part.find('=');
      if (eq == std::string::npos) {
        out["total"] = ParseUint(key, part);
      } else {
        const std::string name = Trim(part.substr(0, eq));
        check_name(name);
        out[name] = ParseUint(key, Trim(part.substr(eq + 1)));
      }
    }
  } else {
    out["total"] = AsUint(key, v);
  }
  return out;
}

}  // namespace

const std::vector<std::string>& SettingKeys() {
  static const std::vector<std::string> keys = {
      "alpaca", "dolly", "supernatural", "supernatural_cap", "corpus",
      "instructions", "out_dir", "seed", "proportion", "ratio", "strategies",
      "shuffle_output_order", "typo_kinds", "predictor", "predictor_url",
      "predictor_timeout_ms", "predictor_max_in_flight", "workers",
      "expect_count"};
  return keys;
}

void ApplySetting(RunConfig& c, const std::string& key, const json& v) {
  if (key == "alpaca") c.alpaca = AsString(key, v);
  else if (key == "dolly") c.dolly = AsString(key, v);
  else if (key == "supernatural") c.supernatural = AsString(key, v);
  else if (key == "supernatural_cap") c.supernatural_cap = AsUint(key, v);
  else if (key == "corpus") c.corpus = AsString(key, v);
  else if (key == "instructions") c.instructions = AsString(key, v);
  else if (key == "out_dir") c.out_dir = AsString(key, v);
  else if (key == "seed") c.seed = AsUint(key, v);
  else if (key == "proportion") c.proportions = AsDoubleList(key, v);
  else if (key == "ratio") c.ratio = AsDouble(key, v);
  else if (key == "strategies") c.strategies = AsStrategies(key, v);
  else if (key == "shuffle_output_order") c.shuffle_output_order = AsBool(key, v);
  else if (key == "typo_kinds") c.typo_kinds = AsTypoKinds(key, v);
  else if (key == "predictor") c.predictor.mode = AsString(key, v);
  else if (key == "predictor_url") c.predictor.url = AsString(key, v);
  else if (key == "predictor_timeout_ms") c.predictor.timeout_ms = static_cast<int>(AsUint(key, v));
  else if (key == "predictor_max_in_flight") c.predictor.max_in_flight = static_cast<int>(AsUint(key, v));
  else if (key == "workers") c.workers = AsUint(key, v);
  else if (key == "expect_count") c.expect_counts = AsExpectCounts(key, v);
  else throw ConfigError("unknown setting \"" + key + "\"");
}

void RunConfig::Validate() const {
  for (double p : proportions) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("proportion " + std::to_string(p) + " outside [0, 1]");
    }
  }
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("ratio must be within (0, 1]");
  const bool any_perturbed =
      std::any_of(proportions.begin(), proportions.end(), [](double p) { return p > 0; });
  if (any_perturbed && strategies.empty()) {
    throw ConfigError("no strategies enabled");
  }
  if (predictor.mode != "offline" && predictor.mode != "remote") {
    throw ConfigError("predictor must be \"offline\" or \"remote\"");
  }
  if (predictor.mode == "remote" && predictor.url.empty()) {
    throw ConfigError("remote predictor requires --predictor-url");
  }
  if (predictor.timeout_ms <= 0) throw ConfigError("predictor timeout must be positive");
  if (predictor.max_in_flight <= 0) throw ConfigError("predictor max in-flight must be positive");
}

MixtureSpec RunConfig::SpecFor(double proportion) const {
  MixtureSpec spec;
  spec.proportion = proportion;
  spec.ratio = ratio;
  spec.seed = seed;
  spec.strategies = strategies;
  spec.shuffle_output_order = shuffle_output_order;
  spec.typo_kinds = typo_kinds;
  return spec;
}

EnvLookup ProcessEnvironment() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

RunConfig ResolveConfig(const std::optional<std::filesystem::path>& config_file,
                        const EnvLookup& env,
                        const std::map<std::string, std::string>& flags) {
  RunConfig config;
  if (config_file) {
    json doc;
    try {
      doc = json::parse(ReadFile(*config_file));
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + config_file->string() + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) ApplySetting(config, key, value);
  }
  if (env) {
    for (const std::string& key : SettingKeys()) {
      std::string name(kEnvPrefix);
      for (char ch : key) name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
      if (auto v = env(name)) ApplySetting(config, key, json(*v));
    }
  }
  for (const auto& [key, value] : flags) ApplySetting(config, key, json(value));
  config.Validate();
  return config;
}

std::unique_ptr<MaskPredictor> MakePredictor(const RunConfig& config) {
  if (config.predictor.mode == "remote") {
    return std::make_unique<RemotePredictor>(RemotePredictorOptions{
        config.predictor.url, std::chrono::milliseconds(config.predictor.timeout_ms),
        config.predictor.max_in_flight});
  }
  return std::make_unique<OfflinePredictor>(config.seed);
}

}  // namespace noisy::cli
