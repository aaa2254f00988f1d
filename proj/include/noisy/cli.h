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

#ifndef NOISY_CLI_H_
#define NOISY_CLI_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "noisy/ingest.h"
#include "noisy/mixture.h"
#include "noisy/perturb.h"
#include "noisy/predictor.h"

namespace noisy::cli {

// Exit codes of the noisy-instruct tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFailure = 3;

// Environment variables mirror the setting keys below, upper-cased with this
// prefix: NOISY_SEED, NOISY_OUT_DIR, NOISY_PREDICTOR_URL, ...
inline constexpr std::string_view kEnvPrefix = "NOISY_";

struct PredictorSettings {
  std::string mode = "offline";  // "offline" | "remote"
  std::string url;
  int timeout_ms = 10000;
  int max_in_flight = 8;
};

// Everything a command can be configured with. Resolved from, in increasing
// precedence: defaults, the --config JSON document, NOISY_* environment
// variables, command-line flags.
struct RunConfig {
  // ingest
  std::optional<std::filesystem::path> alpaca;
  std::optional<std::filesystem::path> dolly;
  std::optional<std::filesystem::path> supernatural;
  std::optional<size_t> supernatural_cap;
  // mix / eval-set
  std::filesystem::path corpus;
  std::filesystem::path instructions;
  std::filesystem::path out_dir = ".";
  uint64_t seed = kDefaultSeed;
  std::vector<double> proportions{0.0, 0.25, 0.5, 0.75, 1.0};
  double ratio = 0.25;
  std::vector<PerturbationStrategy> strategies{kAllStrategies.begin(),
                                               kAllStrategies.end()};
  bool shuffle_output_order = false;
  std::vector<TypoKind> typo_kinds{kDefaultTypoKinds.begin(),
                                   kDefaultTypoKinds.end()};
  PredictorSettings predictor;
  size_t workers = 0;
  // "total" or a dataset tag -> expected sample count.
  std::map<std::string, size_t> expect_counts;

  // Throws ConfigError.
  void Validate() const;
  MixtureSpec SpecFor(double proportion) const;
};

// Applies one setting. `value` is either typed JSON (config file) or a
// string (environment, flags). Throws ConfigError on unknown keys or bad
// values. Keys: alpaca, dolly, supernatural, supernatural_cap, corpus,
// instructions, out_dir, seed, proportion, ratio, strategies,
// shuffle_output_order, typo_kinds, predictor, predictor_url,
// predictor_timeout_ms, predictor_max_in_flight, workers, expect_count.
void ApplySetting(RunConfig& config, const std::string& key,
                  const nlohmann::json& value);

// Every key listed above.
const std::vector<std::string>& SettingKeys();

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

EnvLookup ProcessEnvironment();

// Defaults <- config file <- environment <- flags.
RunConfig ResolveConfig(const std::optional<std::filesystem::path>& config_file,
                        const EnvLookup& env,
                        const std::map<std::string, std::string>& flags);

std::unique_ptr<MaskPredictor> MakePredictor(const RunConfig& config);

// ---------------------------------------------------------------------------
// Commands. Each throws noisy::Error subclasses on failure; RunCli maps them
// to exit codes.

struct IngestResult {
  CorpusManifest manifest;
  std::filesystem::path corpus_file;
  std::filesystem::path manifest_file;
};

// Writes <out_dir>/corpus.jsonl and <out_dir>/corpus.manifest.json, then
// checks expect_counts (ExpectedCountMismatch).
IngestResult CmdIngest(const RunConfig& config);

struct MixFileResult {
  double proportion = 0.0;
  std::filesystem::path output_file;
  std::filesystem::path manifest_file;
  VerifyReport report;
};

// One mix-<pct>.jsonl plus manifest per configured proportion. If a build
// fails no mixture file is written for that proportion; finished work is kept
// in mix-<pct>.resume.jsonl and reused by the next run.
std::vector<MixFileResult> CmdMix(const RunConfig& config);

// Reads one instruction per line, or JSONL objects with an "instruction"
// field. Blank lines are ignored; the index counts instructions.
std::vector<std::string> ReadInstructionFile(const std::filesystem::path& path);

struct EvalFileResult {
  double proportion = 0.0;
  std::filesystem::path output_file;
  std::filesystem::path manifest_file;
  std::map<std::string, size_t> per_strategy;
  VerifyReport report;
};

// One eval-<pct>.jsonl plus manifest per configured proportion.
std::vector<EvalFileResult> CmdEvalSet(const RunConfig& config);

struct StrategyStats {
  size_t count = 0;
  double delta_mean = 0.0;  // perturbed minus original word count
  long delta_min = 0;
  long delta_max = 0;
  size_t count_law_violations = 0;
};

struct StatsReport {
  size_t total = 0;
  size_t perturbed = 0;
  size_t kept = 0;
  double achieved_proportion = 0.0;
  double ratio = 0.25;
  std::map<std::string, StrategyStats> per_strategy;
  std::map<size_t, size_t> misspelling_distance_histogram;
  std::map<std::string, size_t> typo_kinds;
  std::string sha256;

  nlohmann::json ToJson() const;
  std::string ToText() const;
};

// Optimal string alignment distance: Levenshtein plus adjacent
// transposition as a single edit.
size_t OsaDistance(std::string_view a, std::string_view b);

// `ratio` defaults to the sidecar manifest's, else 0.25.
StatsReport CmdStats(const std::filesystem::path& mixture,
                     std::optional<double> ratio = std::nullopt);

// Manifest path for a mixture or eval-set file: foo.jsonl -> foo.manifest.json.
std::filesystem::path ManifestPathFor(const std::filesystem::path& data_file);

// Checks a mixture file against its sidecar manifest (checksum, counts, spec)
// and runs Verify with the source corpus named in the manifest, or
// `corpus_override`.
VerifyReport CmdValidate(const std::filesystem::path& mixture,
                         const std::optional<std::filesystem::path>& corpus_override);

// Entry point of the noisy-instruct binary. Data goes to `out`; logs and the
// JSON error record go to `err`.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err, const EnvLookup& env = ProcessEnvironment());

}  // namespace noisy::cli

#endif  // NOISY_CLI_H_
