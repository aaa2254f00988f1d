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
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "noisy/errors.h"
#include "noisy/ingest.h"
#include "oracles.h"
#include "stub_predictor.h"
#include "worked_example.h"

namespace noisy {
namespace {

namespace fs = std::filesystem;
namespace ex = testing::worked_example;

std::vector<std::string> Ids(size_t n) {
  std::vector<std::string> ids;
  for (size_t i = 0; i < n; ++i) ids.push_back("s" + std::to_string(i));
  return ids;
}

MixtureSpec Spec(double proportion, uint64_t seed = kDefaultSeed) {
  MixtureSpec spec;
  spec.proportion = proportion;
  spec.seed = seed;
  return spec;
}

std::vector<InstructionSample> FixtureCorpus() {
  const fs::path dir = NOISY_FIXTURE_DIR;
  return Combine({ParseAlpacaFile(dir / "alpaca_mini.json"),
                  ParseSupernatural(dir / "supernatural_mini"),
                  ParseDollyFile(dir / "dolly_mini.jsonl")})
      .samples;
}

std::vector<InstructionSample> GeneratedCorpus(size_t n, uint64_t seed) {
  testing::InstructionGenerator gen(seed);
  std::vector<InstructionSample> out;
  while (out.size() < n) {
    std::string text = gen.Next(24);
    if (testing::CountRuns(text) == 0) continue;
    InstructionSample s;
    s.id = MakeSampleId(Dataset::kDolly, out.size());
    s.dataset = Dataset::kDolly;
    s.instruction = std::move(text);
    if (out.size() % 3 == 0) s.context = "context " + std::to_string(out.size());
    s.response = "response " + std::to_string(out.size());
    out.push_back(std::move(s));
  }
  return out;
}

// Independent tally of a plan.
std::map<PerturbationStrategy, size_t> Tally(const MixturePlan& plan) {
  std::map<PerturbationStrategy, size_t> counts;
  for (const auto& a : plan.assignment) {
    if (a) ++counts[*a];
  }
  return counts;
}

size_t Spread(const std::map<PerturbationStrategy, size_t>& counts,
              const std::vector<PerturbationStrategy>& enabled) {
  size_t lo = SIZE_MAX, hi = 0;
  for (PerturbationStrategy s : enabled) {
    const size_t c = counts.contains(s) ? counts.at(s) : 0;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return hi - lo;
}

TEST(MixtureSpecTest, ValidateAndJson) {
  MixtureSpec spec = Spec(0.25);
  EXPECT_NO_THROW(spec.Validate());
  const MixtureSpec back = MixtureSpec::FromJson(spec.ToJson());
  EXPECT_EQ(back.ToJson(), spec.ToJson());
  nlohmann::json legacy = spec.ToJson();
  legacy.erase("typo_kinds");
  EXPECT_EQ(MixtureSpec::FromJson(legacy).typo_kinds, spec.typo_kinds);
  MixtureSpec all = spec;
  all.typo_kinds.assign(kAllTypoKinds.begin(), kAllTypoKinds.end());
  EXPECT_EQ(MixtureSpec::FromJson(all.ToJson()).typo_kinds, all.typo_kinds);
  MixtureSpec no_typos = spec;
  no_typos.typo_kinds.clear();
  EXPECT_THROW(no_typos.Validate(), ConfigError);
  EXPECT_THROW(Spec(-0.1).Validate(), ConfigError);
  EXPECT_THROW(Spec(1.1).Validate(), ConfigError);
  MixtureSpec bad_ratio = Spec(0.5);
  bad_ratio.ratio = 0.0;
  EXPECT_THROW(bad_ratio.Validate(), ConfigError);
  MixtureSpec none = Spec(0.5);
  none.strategies.clear();
  EXPECT_THROW(none.Validate(), ConfigError);
  none.proportion = 0.0;
  EXPECT_NO_THROW(none.Validate());
}

TEST(PlanTest, TwelveAtHalf) {
  const MixturePlan plan = Plan(Ids(12), Spec(0.5));
  EXPECT_EQ(plan.perturbed(), 6u);
  for (PerturbationStrategy s : kAllStrategies) EXPECT_EQ(plan.counts.at(s), 1u);
  EXPECT_EQ(Tally(plan), plan.counts);
}

TEST(PlanTest, FullCorpusSizeAtQuarter) {
  const MixturePlan plan = Plan(Ids(122806), Spec(0.25));
  EXPECT_EQ(plan.perturbed(), 30702u);
  EXPECT_EQ(plan.kept, 122806u - 30702u);
  const auto tally = Tally(plan);
  for (PerturbationStrategy s : kAllStrategies) EXPECT_EQ(tally.at(s), 5117u);
}

TEST(PlanTest, ZeroProportionKeepsAll) {
  const MixturePlan plan = Plan(Ids(50), Spec(0.0));
  EXPECT_EQ(plan.perturbed(), 0u);
  for (const auto& a : plan.assignment) EXPECT_FALSE(a.has_value());
}

TEST(PlanTest, DeterministicAndSeedSensitive) {
  const auto a = Plan(Ids(100), Spec(0.5, 1)).assignment;
  EXPECT_EQ(a, Plan(Ids(100), Spec(0.5, 1)).assignment);
  EXPECT_NE(a, Plan(Ids(100), Spec(0.5, 2)).assignment);
}

TEST(PlanTest, ProportionAndEvennessProperty) {
  std::mt19937_64 gen(5);
  const double props[] = {0.0, 0.25, 0.5, 0.75, 1.0, 0.1, 0.33};
  for (int trial = 0; trial < 300; ++trial) {
    const size_t n = gen() % 2001;
    MixtureSpec spec = Spec(props[gen() % 7], gen());
    if (trial % 4 == 0) {
      spec.strategies.assign(kAllStrategies.begin(), kAllStrategies.begin() + 1 + gen() % 6);
    }
    const MixturePlan plan = Plan(Ids(n), spec);
    const size_t expected = static_cast<size_t>(std::floor(spec.proportion * n + 0.5 + 1e-9));
    ASSERT_EQ(plan.perturbed(), std::min(n, expected));
    ASSERT_LE(Spread(Tally(plan), spec.strategies), 1u);
    ASSERT_EQ(plan.assignment.size(), n);
  }
}

TEST(BuildTest, FullProportionDeleteStopWordsGivesExampleRow) {
  InstructionSample s{"gpt4-alpaca:000000", Dataset::kGpt4Alpaca,
                      std::string(ex::kOriginal), std::string(ex::kInput), "out"};
  MixtureSpec spec = Spec(1.0);
  spec.strategies = {PerturbationStrategy::kDeleteStopWords};
  const auto out = Build({s}, spec, nullptr);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].sample.instruction, ex::kDeleteStopWords);
  EXPECT_EQ(out[0].sample.context, std::string(ex::kInput));
}

TEST(BuildTest, VerifiesOnFixtureAtEveryProportion) {
  const auto corpus = FixtureCorpus();
  OfflinePredictor predictor(42);
  for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const MixtureSpec spec = Spec(p);
    const auto out = Build(corpus, spec, &predictor);
    ASSERT_EQ(out.size(), corpus.size());
    const VerifyReport report = Verify(out, spec, &corpus);
    EXPECT_TRUE(report.ok()) << report.ToJson().dump(2);
    for (size_t i = 0; i < corpus.size(); ++i) EXPECT_EQ(out[i].sample.id, corpus[i].id);
  }
}

TEST(BuildTest, WorkerCountDoesNotChangeOutput) {
  const auto corpus = GeneratedCorpus(400, 3);
  OfflinePredictor predictor(42);
  MixtureSpec spec = Spec(0.75);
  BuildOptions one{1}, many{8};
  const auto a = Build(corpus, spec, &predictor, one);
  const auto b = Build(corpus, spec, &predictor, many);
  EXPECT_EQ(MixtureToJsonl(a), MixtureToJsonl(b));
  spec.shuffle_output_order = true;
  const auto c = Build(corpus, spec, &predictor, one);
  const auto d = Build(corpus, spec, &predictor, many);
  EXPECT_EQ(MixtureToJsonl(c), MixtureToJsonl(d));
  EXPECT_NE(MixtureToJsonl(a), MixtureToJsonl(c));
  EXPECT_TRUE(Verify(c, spec, &corpus).ok());
}

TEST(BuildTest, RandomCorporaRoundTripThroughVerify) {
  std::mt19937_64 gen(17);
  OfflinePredictor predictor(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto corpus = GeneratedCorpus(1 + gen() % 60, gen());
    MixtureSpec spec = Spec(static_cast<double>(gen() % 5) * 0.25, gen());
    spec.ratio = 0.1 + static_cast<double>(gen() % 10) * 0.1;
    spec.shuffle_output_order = gen() % 2 == 0;
    const auto out = Build(corpus, spec, &predictor, {4});
    const VerifyReport report = Verify(out, spec, &corpus);
    ASSERT_TRUE(report.ok()) << report.ToJson().dump(2);
    ASSERT_EQ(ParseMixtureJsonl(MixtureToJsonl(out), "m"), out);
  }
}

TEST(BuildTest, PredictorErrorCarriesSampleIdAndCompletedWork) {
  const auto corpus = GeneratedCorpus(60, 11);
  MixtureSpec spec = Spec(1.0);
  testing::StubPredictor broken([](const MaskQuery& q) {
    return std::vector<std::string>(q.mask_count() - 1, "x");
  });
  std::vector<PerturbedSample> done;
  BuildOptions opts{4, nullptr, &done};
  try {
    Build(corpus, spec, &broken, opts);
    FAIL() << "expected a prediction count error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPredictionCountMismatch);
    EXPECT_NE(std::string(e.what()).find("dolly:"), std::string::npos) << e.what();
  }
  EXPECT_LT(done.size(), corpus.size());
  for (const auto& s : done) {
    ASSERT_TRUE(s.perturbation.strategy.has_value());
    EXPECT_FALSE(NeedsPredictor(*s.perturbation.strategy));
  }

  // A resumed run with a working predictor reuses finished samples and ends
  // with the same bytes as a clean run.
  OfflinePredictor good(42);
  std::map<std::string, PerturbedSample> resume;
  for (const auto& s : done) resume.emplace(s.sample.id, s);
  BuildOptions again{4, &resume, nullptr};
  EXPECT_EQ(MixtureToJsonl(Build(corpus, spec, &good, again)),
            MixtureToJsonl(Build(corpus, spec, &good)));
}

TEST(BuildTest, MissingPredictorFailsOnlyWhenNeeded) {
  const auto corpus = GeneratedCorpus(30, 2);
  MixtureSpec spec = Spec(1.0);
  EXPECT_THROW(Build(corpus, spec, nullptr), PredictorUnavailable);
  spec.strategies = {PerturbationStrategy::kShuffleWords, PerturbationStrategy::kAddMisspelling};
  EXPECT_NO_THROW(Build(corpus, spec, nullptr));
}

// Synthetic mixture where every sample carries `tags[i]` with no edits.
std::vector<PerturbedSample> Tagged(const std::vector<std::optional<PerturbationStrategy>>& tags) {
  std::vector<PerturbedSample> out;
  for (size_t i = 0; i < tags.size(); ++i) {
    InstructionSample s{"x:" + std::to_string(i), Dataset::kDolly, "do it", std::nullopt, "r"};
    out.push_back({s, {tags[i], s.instruction, {}}});
  }
  return out;
}

TEST(VerifyTest, EvennessCounterexample) {
  const size_t counts[] = {7, 5, 6, 6, 6, 6};
  std::vector<std::optional<PerturbationStrategy>> tags;
  for (size_t s = 0; s < 6; ++s) {
    for (size_t c = 0; c < counts[s]; ++c) tags.push_back(kAllStrategies[s]);
  }
  ASSERT_EQ(tags.size(), 36u);
  const VerifyReport report = Verify(Tagged(tags), Spec(1.0));
  EXPECT_FALSE(report.ok());
  EXPECT_EQ(report.Find("evenness")->status, CheckStatus::kFail);
  EXPECT_EQ(report.Find("proportion")->status, CheckStatus::kPass);
  EXPECT_EQ(report.Find("scope")->status, CheckStatus::kSkip);
}

TEST(VerifyTest, ProportionAndStrategySetViolations) {
  std::vector<std::optional<PerturbationStrategy>> tags(8, std::nullopt);
  tags[0] = PerturbationStrategy::kShuffleWords;
  EXPECT_EQ(Verify(Tagged(tags), Spec(0.25)).Find("proportion")->status, CheckStatus::kFail);
  tags[1] = PerturbationStrategy::kDeleteWords;
  MixtureSpec only_shuffle = Spec(0.25);
  only_shuffle.strategies = {PerturbationStrategy::kShuffleWords};
  EXPECT_EQ(Verify(Tagged(tags), only_shuffle).Find("strategy_set")->status, CheckStatus::kFail);
  EXPECT_EQ(Verify({}, Spec(0.0)).Find("nonempty")->status, CheckStatus::kFail);
}

TEST(VerifyTest, MutationsAreCaught) {
  const auto corpus = FixtureCorpus();
  OfflinePredictor predictor(42);
  const MixtureSpec spec = Spec(0.5);
  const auto out = Build(corpus, spec, &predictor);

  auto mutated = out;
  mutated[3].sample.response += "!";
  const VerifyReport scope = Verify(mutated, spec, &corpus);
  ASSERT_EQ(scope.Find("scope")->status, CheckStatus::kFail);
  EXPECT_NE(scope.Find("scope")->details[0].find(corpus[3].id), std::string::npos);

  auto tampered = out;
  for (auto& s : tampered) {
    if (s.perturbation.strategy) {
      s.sample.instruction += " extra";
      break;
    }
  }
  EXPECT_EQ(Verify(tampered, spec, &corpus).Find("edit_replay")->status, CheckStatus::kFail);

  auto dropped = out;
  dropped.pop_back();
  EXPECT_EQ(Verify(dropped, spec, &corpus).Find("partition")->status, CheckStatus::kFail);

  auto dup = out;
  dup.push_back(dup.front());
  EXPECT_EQ(Verify(dup, spec, &corpus).Find("unique_ids")->status, CheckStatus::kFail);
}

TEST(EvalSetTest, AlignmentAndDistribution) {
  std::vector<std::string> lines;
  testing::InstructionGenerator gen(8);
  while (lines.size() < 600) {
    std::string l = gen.Next(20);
    if (testing::CountRuns(l) > 0) lines.push_back(l);
  }
  OfflinePredictor predictor(42);
  const auto identity = PerturbEvalSet(lines, Spec(0.0), &predictor, 4);
  for (size_t i = 0; i < lines.size(); ++i) {
    EXPECT_EQ(identity[i].instruction, lines[i]);
    EXPECT_EQ(identity[i].index, i);
  }
  const auto full = PerturbEvalSet(lines, Spec(1.0), &predictor, 4);
  std::map<PerturbationStrategy, size_t> counts;
  for (size_t i = 0; i < full.size(); ++i) {
    ASSERT_EQ(full[i].perturbation.original_instruction, lines[i]);
    ASSERT_TRUE(full[i].perturbation.strategy.has_value());
    ++counts[*full[i].perturbation.strategy];
  }
  for (PerturbationStrategy s : kAllStrategies) EXPECT_EQ(counts[s], 100u);
  EXPECT_TRUE(VerifyEvalSet(full, lines, Spec(1.0)).ok());
  EXPECT_EQ(PerturbEvalSet(lines, Spec(1.0), &predictor, 1), full);

  auto shifted = full;
  std::swap(shifted[0], shifted[1]);
  EXPECT_EQ(VerifyEvalSet(shifted, lines, Spec(1.0)).Find("alignment")->status, CheckStatus::kFail);
}

TEST(MixtureIoTest, EditAndSampleJson) {
  const Edit typo{EditKind::kTypo, {2}, "given", "givdn", "substitute_letter"};
  EXPECT_EQ(EditFromJson(EditToJson(typo)), typo);
  const Edit del{EditKind::kDelete, {4}, "in", "", ""};
  EXPECT_FALSE(EditToJson(del).contains("after"));
  EXPECT_EQ(EditFromJson(EditToJson(del)), del);
  const Edit ins{EditKind::kInsert, {7}, "", "than", ""};
  EXPECT_FALSE(EditToJson(ins).contains("before"));
  EXPECT_EQ(EditFromJson(EditToJson(ins)), ins);

  const auto corpus = FixtureCorpus();
  const PerturbedSample kept = Keep(corpus[0]);
  const auto j = PerturbedSampleToJson(kept);
  EXPECT_TRUE(j.at("perturbation").at("strategy").is_null());
  EXPECT_EQ(PerturbedSampleFromJson(j, "m", "line 1"), kept);
  EXPECT_THROW(ParseMixtureJsonl("{\"id\":1}\n", "m"), MalformedRecord);
}

TEST(MixtureIoTest, ManifestJsonAndLabels) {
  MixtureManifest m;
  m.spec = Spec(0.25);
  m.total = 28;
  m.perturbed = 7;
  m.kept = 21;
  m.per_strategy = {{"shuffle_words", 2}};
  m.output_file = "mix-025.jsonl";
  m.output_sha256 = "aa";
  m.corpus_file = "corpus.jsonl";
  m.corpus_sha256 = "bb";
  m.predictor = "offline";
  m.stop_words_sha256 = std::string(kShippedStopWordsSha256);
  EXPECT_EQ(MixtureManifest::FromJson(m.ToJson()).ToJson(), m.ToJson());
  EXPECT_EQ(ProportionLabel(0.0), "000");
  EXPECT_EQ(ProportionLabel(0.25), "025");
  EXPECT_EQ(ProportionLabel(1.0), "100");
}

}  // namespace
}  // namespace noisy
