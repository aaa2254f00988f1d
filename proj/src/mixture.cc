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

#include "noisy/mixture.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include "noisy/errors.h"
#include "noisy/rng.h"

namespace noisy {
namespace {

constexpr size_t kMaxDetails = 20;

[[noreturn]] void RethrowWithContext(const Error& e, const std::string& id) {
  const std::string msg = "sample " + id + ": " + e.what();
  switch (e.kind()) {
    case ErrorKind::kPredictorUnavailable: throw PredictorUnavailable(msg);
    case ErrorKind::kMalformedResponse: throw MalformedResponse(msg);
    case ErrorKind::kIo: throw IoError(msg);
    case ErrorKind::kConfig: throw ConfigError(msg);
    default: throw Error(e.kind(), msg);
  }
}

struct Tagged {
  std::string_view id;
  std::optional<PerturbationStrategy> strategy;
};

void Fail(CheckResult& c, std::string detail) {
  c.status = CheckStatus::kFail;
  if (c.details.size() < kMaxDetails) c.details.push_back(std::move(detail));
}

// strategy_set, proportion and evenness checks shared by mixtures and
// evaluation sets.
void CheckDistribution(VerifyReport& report, const std::vector<Tagged>& items,
                       const MixtureSpec& spec) {
  const size_t n = items.size();
  std::map<PerturbationStrategy, size_t> counts;
  for (PerturbationStrategy s : spec.strategies) counts[s] = 0;
  size_t perturbed = 0;

  report.checks.push_back({"strategy_set", CheckStatus::kPass, {}});
  for (const Tagged& t : items) {
    if (!t.strategy) continue;
    ++perturbed;
    if (!counts.contains(*t.strategy)) {
      Fail(report.checks.back(), std::string(t.id) + ": strategy " +
                                     std::string(StrategyName(*t.strategy)) +
                                     " not enabled");
    }
    ++counts[*t.strategy];
  }

  report.checks.push_back({"proportion", CheckStatus::kPass, {}});
  const size_t expected =
      std::min(n, RoundHalfUp(spec.proportion * static_cast<double>(n)));
  if (perturbed != expected) {
    Fail(report.checks.back(), "perturbed " + std::to_string(perturbed) + " of " +
                                   std::to_string(n) + ", expected " +
                                   std::to_string(expected));
  }

  report.checks.push_back({"evenness", CheckStatus::kPass, {}});
  if (perturbed > 0 && !counts.empty()) {
    const auto [lo, hi] = std::minmax_element(
        counts.begin(), counts.end(),
        [](const auto& a, const auto& b) { return a.second < b.second; });
    if (hi->second - lo->second > 1) {
      std::string detail = "per-strategy counts spread " +
                           std::to_string(hi->second - lo->second) + ":";
      for (const auto& [s, c] : counts) {
        detail += " " + std::string(StrategyName(s)) + "=" + std::to_string(c);
      }
      Fail(report.checks.back(), detail);
    }
  }
}

size_t ResolveWorkers(size_t requested, size_t jobs) {
  size_t n = requested;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return std::max<size_t>(1, std::min(n, jobs));
}

// Runs fn(i) for i in [0, jobs) on `workers` threads. Stops handing out new
// jobs after the first failure; rethrows the failure with the lowest index so
// the reported error does not depend on scheduling.
template <typename Fn>
void ParallelFor(size_t jobs, size_t workers, Fn&& fn,
                 const std::vector<std::string>* ids = nullptr) {
  std::atomic<size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  size_t failed_at = jobs;
  std::exception_ptr failure;

  const auto run = [&] {
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const size_t i = next.fetch_add(1);
      if (i >= jobs) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
        stop = true;
      }
    }
  };
  const size_t n = ResolveWorkers(workers, jobs);
  if (n == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (size_t t = 0; t < n; ++t) pool.emplace_back(run);
  }
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const Error& e) {
      if (ids != nullptr) RethrowWithContext(e, (*ids)[failed_at]);
      throw;
    }
  }
}

}  // namespace

void MixtureSpec::Validate() const {
  if (!(proportion >= 0.0 && proportion <= 1.0)) {
    throw ConfigError("proportion must be within [0, 1]");
  }
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw ConfigError("ratio must be within (0, 1]");
  }
  if (proportion > 0.0 && strategies.empty()) {
    throw ConfigError("at least one strategy is required when proportion > 0");
  }
  std::set<PerturbationStrategy> unique(strategies.begin(), strategies.end());
  if (unique.size() != strategies.size()) {
    throw ConfigError("strategy list contains duplicates");
  }
  std::set<TypoKind> kinds(typo_kinds.begin(), typo_kinds.end());
  if (kinds.empty() || kinds.size() != typo_kinds.size()) {
    throw ConfigError("typo kinds must be a nonempty list without duplicates");
  }
}

PerturbConfig MixtureSpec::ToPerturbConfig() const {
  PerturbConfig cfg;
  cfg.ratio = ratio;
  cfg.typo_kinds = typo_kinds;
  return cfg;
}

nlohmann::json MixtureSpec::ToJson() const {
  nlohmann::json names = nlohmann::json::array();
  for (PerturbationStrategy s : strategies) names.push_back(StrategyName(s));
  nlohmann::json kinds = nlohmann::json::array();
  for (TypoKind k : typo_kinds) kinds.push_back(TypoKindName(k));
  return {{"proportion", proportion},
          {"ratio", ratio},
          {"seed", seed},
          {"strategies", names},
          {"shuffle_output_order", shuffle_output_order},
          {"typo_kinds", kinds}};
}

MixtureSpec MixtureSpec::FromJson(const nlohmann::json& j) {
  MixtureSpec spec;
  spec.proportion = j.at("proportion").get<double>();
  spec.ratio = j.value("ratio", 0.25);
  spec.seed = j.value("seed", kDefaultSeed);
  if (j.contains("strategies")) {
    spec.strategies.clear();
    for (const auto& name : j.at("strategies")) {
      const auto s = ParseStrategy(name.get<std::string>());
      if (!s) throw ConfigError("unknown strategy " + name.dump());
      spec.strategies.push_back(*s);
    }
  }
  spec.shuffle_output_order = j.value("shuffle_output_order", false);
  if (j.contains("typo_kinds")) {
    spec.typo_kinds.clear();
    for (const auto& name : j.at("typo_kinds")) {
      const auto k = ParseTypoKind(name.get<std::string>());
      if (!k) throw ConfigError("unknown typo kind " + name.dump());
      spec.typo_kinds.push_back(*k);
    }
  }
  return spec;
}

MixturePlan Plan(const std::vector<std::string>& ids, const MixtureSpec& spec) {
  spec.Validate();
  MixturePlan plan;
  plan.ids = ids;
  const size_t n = ids.size();
  plan.assignment.assign(n, std::nullopt);
  for (PerturbationStrategy s : spec.strategies) plan.counts[s] = 0;

  const size_t target =
      std::min(n, RoundHalfUp(spec.proportion * static_cast<double>(n)));
  Rng select = Rng::ForStream(spec.seed, "", "mixture:select");
  std::vector<size_t> picked = select.SampleIndices(n, target);
  Rng deal = Rng::ForStream(spec.seed, "", "mixture:assign");
  deal.Shuffle(std::span<size_t>(picked));
  for (size_t i = 0; i < picked.size(); ++i) {
    const PerturbationStrategy s = spec.strategies[i % spec.strategies.size()];
    plan.assignment[picked[i]] = s;
    ++plan.counts[s];
  }
  plan.kept = n - picked.size();
  return plan;
}

std::vector<PerturbedSample> Build(const std::vector<InstructionSample>& corpus,
                                   const MixtureSpec& spec,
                                   MaskPredictor* predictor,
                                   const BuildOptions& options) {
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& s : corpus) ids.push_back(s.id);
  const MixturePlan plan = Plan(ids, spec);
  const PerturbConfig cfg = spec.ToPerturbConfig();

  std::vector<std::optional<PerturbedSample>> results(corpus.size());
  try {
    ParallelFor(
        corpus.size(), options.workers,
        [&](size_t i) {
          const auto& strategy = plan.assignment[i];
          if (!strategy) {
            results[i] = Keep(corpus[i]);
            return;
          }
          if (options.resume != nullptr) {
            const auto it = options.resume->find(corpus[i].id);
            if (it != options.resume->end() &&
                it->second.perturbation.strategy == strategy &&
                it->second.perturbation.original_instruction ==
                    corpus[i].instruction) {
              results[i] = it->second;
              return;
            }
          }
          Rng rng = StrategyStream(spec.seed, corpus[i].id, *strategy);
          results[i] = Apply(*strategy, corpus[i], cfg, predictor, rng);
        },
        &ids);
  } catch (...) {
    if (options.completed_on_failure != nullptr) {
      for (auto& r : results) {
        if (r && r->perturbation.strategy) {
          options.completed_on_failure->push_back(std::move(*r));
        }
      }
    }
    throw;
  }

  std::vector<PerturbedSample> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r));
  if (spec.shuffle_output_order) {
    Rng order = Rng::ForStream(spec.seed, "", "mixture:order");
    order.Shuffle(std::span<PerturbedSample>(out));
  }
  return out;
}

std::vector<EvalItem> PerturbEvalSet(const std::vector<std::string>& instructions,
                                     const MixtureSpec& spec,
                                     MaskPredictor* predictor, size_t workers) {
  std::vector<std::string> ids;
  ids.reserve(instructions.size());
  for (size_t i = 0; i < instructions.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "eval:%06zu", i);
    ids.emplace_back(buf);
  }
  const MixturePlan plan = Plan(ids, spec);
  const PerturbConfig cfg = spec.ToPerturbConfig();
  std::vector<EvalItem> out(instructions.size());
  ParallelFor(
      instructions.size(), workers,
      [&](size_t i) {
        out[i].index = i;
        const auto& strategy = plan.assignment[i];
        if (!strategy) {
          out[i].instruction = instructions[i];
          out[i].perturbation = {std::nullopt, instructions[i], {}};
          return;
        }
        Rng rng = StrategyStream(spec.seed, ids[i], *strategy);
        PerturbedInstruction p =
            PerturbInstruction(*strategy, instructions[i], cfg, predictor, rng);
        out[i].instruction = std::move(p.instruction);
        out[i].perturbation = std::move(p.perturbation);
      },
      &ids);
  return out;
}

std::string CheckReplay(const Perturbation& perturbation,
                        std::string_view instruction) {
  if (!perturbation.strategy) {
    if (!perturbation.edits.empty()) return "kept sample carries edits";
    if (instruction != perturbation.original_instruction) {
      return "kept sample's instruction differs from its original";
    }
    return "";
  }
  const ReplayResult replay = ReplayEdits(
      Tokenize(perturbation.original_instruction).words, perturbation.edits);
  if (!replay.ok) return replay.error;
  if (Detokenize(replay.words) != instruction) {
    return "replayed edits do not reproduce the instruction";
  }
  return "";
}

bool VerifyReport::ok() const {
  return std::none_of(checks.begin(), checks.end(), [](const CheckResult& c) {
    return c.status == CheckStatus::kFail;
  });
}

const CheckResult* VerifyReport::Find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

nlohmann::json VerifyReport::ToJson() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    const char* status = c.status == CheckStatus::kPass   ? "pass"
                         : c.status == CheckStatus::kFail ? "fail"
                                                          : "skip";
    arr.push_back({{"check", c.name}, {"status", status}, {"details", c.details}});
  }
  return {{"ok", ok()}, {"checks", arr}};
}

VerifyReport Verify(const std::vector<PerturbedSample>& output,
                    const MixtureSpec& spec,
                    const std::vector<InstructionSample>* source) {
  VerifyReport report;
  // References returned by add() must stay valid while later checks are added.
  report.checks.reserve(16);
  const auto add = [&](std::string name) -> CheckResult& {
    report.checks.push_back({std::move(name), CheckStatus::kPass, {}});
    return report.checks.back();
  };
  const auto fail = Fail;

  CheckResult& nonempty = add("nonempty");
  if (output.empty()) fail(nonempty, "mixture has no samples");

  CheckResult& unique = add("unique_ids");
  std::unordered_map<std::string_view, const PerturbedSample*> by_id;
  for (const auto& s : output) {
    if (!by_id.emplace(s.sample.id, &s).second) fail(unique, s.sample.id);
  }

  std::vector<Tagged> tagged;
  tagged.reserve(output.size());
  for (const auto& s : output) tagged.push_back({s.sample.id, s.perturbation.strategy});
  CheckDistribution(report, tagged, spec);

  CheckResult& replay = add("edit_replay");
  for (const auto& s : output) {
    const std::string why = CheckReplay(s.perturbation, s.sample.instruction);
    if (!why.empty()) fail(replay, s.sample.id + ": " + why);
  }

  CheckResult& scope = add("scope");
  CheckResult& partition = add("partition");
  if (source == nullptr) {
    scope.status = CheckStatus::kSkip;
    scope.details.push_back("no source corpus supplied");
    partition.status = CheckStatus::kSkip;
    partition.details.push_back("no source corpus supplied");
  } else {
    std::set<std::string_view> seen;
    for (const auto& src : *source) {
      const auto it = by_id.find(src.id);
      if (it == by_id.end()) {
        fail(partition, src.id + ": missing from mixture");
        continue;
      }
      seen.insert(src.id);
      const PerturbedSample& out = *it->second;
      if (out.sample.context != src.context) fail(scope, src.id + ": context changed");
      if (out.sample.response != src.response) fail(scope, src.id + ": response changed");
      if (out.sample.dataset != src.dataset) fail(scope, src.id + ": dataset changed");
      if (out.perturbation.original_instruction != src.instruction) {
        fail(scope, src.id + ": original_instruction differs from source");
      }
    }
    for (const auto& s : output) {
      if (!seen.contains(s.sample.id)) fail(partition, s.sample.id + ": not in source corpus");
    }
  }
  return report;
}

VerifyReport VerifyEvalSet(const std::vector<EvalItem>& items,
                           const std::vector<std::string>& instructions,
                           const MixtureSpec& spec) {
  VerifyReport report;
  report.checks.push_back({"alignment", CheckStatus::kPass, {}});
  if (items.size() != instructions.size()) {
    Fail(report.checks.back(), "expected " + std::to_string(instructions.size()) +
                                   " items, got " + std::to_string(items.size()));
  }
  std::vector<std::string> ids;
  ids.reserve(items.size());
  for (size_t i = 0; i < items.size(); ++i) {
    ids.push_back(std::to_string(i));
    if (items[i].index != i ||
        (i < instructions.size() &&
         items[i].perturbation.original_instruction != instructions[i])) {
      Fail(report.checks.front(), "item " + std::to_string(i) + " is misaligned");
    }
  }
  std::vector<Tagged> tagged;
  for (size_t i = 0; i < items.size(); ++i) {
    tagged.push_back({ids[i], items[i].perturbation.strategy});
  }
  CheckDistribution(report, tagged, spec);
  report.checks.push_back({"edit_replay", CheckStatus::kPass, {}});
  for (size_t i = 0; i < items.size(); ++i) {
    const std::string why = CheckReplay(items[i].perturbation, items[i].instruction);
    if (!why.empty()) Fail(report.checks.back(), "item " + ids[i] + ": " + why);
  }
  return report;
}

std::string ProportionLabel(double proportion) {
  const double pct = proportion * 100.0;
  char buf[32];
  if (std::fabs(pct - std::round(pct)) < 1e-9) {
    std::snprintf(buf, sizeof(buf), "%03d", static_cast<int>(std::round(pct)));
  } else {
    std::snprintf(buf, sizeof(buf), "%06.2f", pct);
  }
  return buf;
}

}  // namespace noisy
