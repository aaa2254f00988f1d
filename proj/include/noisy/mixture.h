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

#ifndef NOISY_MIXTURE_H_
#define NOISY_MIXTURE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "noisy/perturb.h"
#include "noisy/predictor.h"
#include "noisy/sample.h"

namespace noisy {

inline constexpr uint64_t kDefaultSeed = 42;

struct MixtureSpec {
  double proportion = 0.0;  // fraction of samples perturbed, [0, 1]
  double ratio = 0.25;      // fraction of words each strategy touches, (0, 1]
  uint64_t seed = kDefaultSeed;
  std::vector<PerturbationStrategy> strategies{kAllStrategies.begin(),
                                               kAllStrategies.end()};
  bool shuffle_output_order = false;
  std::vector<TypoKind> typo_kinds{kDefaultTypoKinds.begin(),
                                   kDefaultTypoKinds.end()};

  // Throws ConfigError.
  void Validate() const;

  nlohmann::json ToJson() const;
  static MixtureSpec FromJson(const nlohmann::json& j);
  PerturbConfig ToPerturbConfig() const;
};

// Which samples get which strategy. Aligned with the id list it was planned
// from: assignment[i] is the fate of ids[i], nullopt meaning keep.
struct MixturePlan {
  std::vector<std::string> ids;
  std::vector<std::optional<PerturbationStrategy>> assignment;
  std::map<PerturbationStrategy, size_t> counts;  // every enabled strategy
  size_t kept = 0;

  size_t perturbed() const { return ids.size() - kept; }
};

// Picks round_half_up(proportion * N) ids uniformly, shuffles the picked
// set and deals strategies round-robin over it. Per-strategy counts differ
// by at most one. Deterministic in (number of ids, spec).
MixturePlan Plan(const std::vector<std::string>& ids, const MixtureSpec& spec);

struct BuildOptions {
  // 0 means one worker per hardware thread.
  size_t workers = 0;
  // Results from an earlier, interrupted run of the same (corpus, spec).
  // Entries are reused verbatim for matching ids.
  const std::map<std::string, PerturbedSample>* resume = nullptr;
  // On failure, receives every perturbed sample finished before the error.
  std::vector<PerturbedSample>* completed_on_failure = nullptr;
};

// Executes the plan. The output is identical for any worker count. On the
// first predictor (or other) error the whole build fails: nothing is
// returned, and the error raised is the one of the earliest failing sample,
// with the sample id prepended to the message.
std::vector<PerturbedSample> Build(const std::vector<InstructionSample>& corpus,
                                   const MixtureSpec& spec,
                                   MaskPredictor* predictor,
                                   const BuildOptions& options = {});

struct EvalItem {
  size_t index = 0;
  std::string instruction;
  Perturbation perturbation;

  bool operator==(const EvalItem&) const = default;
};

// Same planning and strategy dealing as Build, over bare instructions.
// output[i] always corresponds to instructions[i].
std::vector<EvalItem> PerturbEvalSet(const std::vector<std::string>& instructions,
                                     const MixtureSpec& spec,
                                     MaskPredictor* predictor,
                                     size_t workers = 0);

enum class CheckStatus { kPass, kFail, kSkip };

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::kPass;
  std::vector<std::string> details;  // failing ids / reasons, capped
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool ok() const;
  const CheckResult* Find(std::string_view name) const;
  nlohmann::json ToJson() const;
};

// Recomputes every claim a mixture file makes: proportion, even strategy
// split, keep/replay consistency and, when the source corpus is supplied,
// that only instructions changed and every source sample appears once.
VerifyReport Verify(const std::vector<PerturbedSample>& output,
                    const MixtureSpec& spec,
                    const std::vector<InstructionSample>* source = nullptr);

// Checks an evaluation set against the instructions it was built from:
// positional alignment, proportion, even strategy split and edit replay.
VerifyReport VerifyEvalSet(const std::vector<EvalItem>& items,
                           const std::vector<std::string>& instructions,
                           const MixtureSpec& spec);

// Replays the edit log of one record against its original instruction.
// Returns an empty string on success, the reason otherwise.
std::string CheckReplay(const Perturbation& perturbation,
                        std::string_view instruction);

// ---------------------------------------------------------------------------
// Files

nlohmann::json EditToJson(const Edit& edit);
Edit EditFromJson(const nlohmann::json& j);
nlohmann::json PerturbationToJson(const Perturbation& p);
Perturbation PerturbationFromJson(const nlohmann::json& j);

nlohmann::json PerturbedSampleToJson(const PerturbedSample& sample);
PerturbedSample PerturbedSampleFromJson(const nlohmann::json& j,
                                        std::string_view source,
                                        std::string_view where);

std::string MixtureToJsonl(const std::vector<PerturbedSample>& samples);
std::vector<PerturbedSample> ParseMixtureJsonl(std::string_view contents,
                                               std::string_view source);

// {"index", "instruction", "original_instruction", "strategy"}
nlohmann::json EvalItemToJson(const EvalItem& item);
std::string EvalSetToJsonl(const std::vector<EvalItem>& items);

// Sidecar manifest written next to every mixture or eval-set file.
struct MixtureManifest {
  MixtureSpec spec;
  size_t total = 0;
  size_t perturbed = 0;
  size_t kept = 0;
  std::map<std::string, size_t> per_strategy;
  std::string output_file;    // file name, relative to the manifest
  std::string output_sha256;
  std::string corpus_file;    // as given on the command line; may be empty
  std::string corpus_sha256;
  std::string predictor;
  std::string stop_words_sha256;

  nlohmann::json ToJson() const;
  static MixtureManifest FromJson(const nlohmann::json& j);
};

// "mix-025.jsonl" for 0.25, "mix-100.jsonl" for 1.0.
std::string ProportionLabel(double proportion);

}  // namespace noisy

#endif  // NOISY_MIXTURE_H_
