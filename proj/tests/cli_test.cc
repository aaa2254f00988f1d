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

#include "noisy/cli.h"

#include <unistd.h>

#include <filesystem>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "noisy/digest.h"
#include "noisy/errors.h"
#include "noisy/mixture.h"
#include "oracles.h"
#include "stub_server.h"

namespace noisy::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kFixtures = NOISY_FIXTURE_DIR;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;

  // The machine-readable error record, if any.
  json ErrorRecord() const {
    std::istringstream in(err);
    std::string line;
    json last;
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] == '{') last = json::parse(line);
    }
    return last;
  }
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("noisy_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun Exec(std::vector<std::string> args) {
    std::ostringstream out, err;
    CliRun r;
    const auto env = env_;
    r.code = RunCli(args, out, err, [env](const std::string& k) -> std::optional<std::string> {
      const auto it = env.find(k);
      if (it == env.end()) return std::nullopt;
      return it->second;
    });
    r.out = out.str();
    r.err = err.str();
    return r;
  }

  fs::path IngestFixtures() {
    const CliRun r = Exec({"ingest", "--alpaca", (kFixtures / "alpaca_mini.json").string(),
                        "--dolly", (kFixtures / "dolly_mini.jsonl").string(),
                        "--supernatural", (kFixtures / "supernatural_mini").string(),
                        "--out-dir", dir_.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    return dir_ / "corpus.jsonl";
  }

  fs::path dir_;
  std::map<std::string, std::string> env_;
};

TEST_F(CliTest, IngestWritesCorpusAndManifest) {
  const fs::path corpus = IngestFixtures();
  EXPECT_EQ(ReadCorpusFile(corpus).size(), 28u);
  const json manifest = json::parse(ReadFile(dir_ / "corpus.manifest.json"));
  EXPECT_EQ(manifest["total"], 28);
  EXPECT_EQ(manifest["counts"]["gpt4-alpaca"], 12);
  EXPECT_EQ(manifest["counts"]["supernatural"], 8);
  EXPECT_EQ(manifest["counts"]["dolly"], 8);
  EXPECT_EQ(manifest["sources"].size(), 3u);
}

TEST_F(CliTest, ExpectCountAssertions) {
  const std::string alpaca = (kFixtures / "alpaca_mini.json").string();
  const std::string dolly = (kFixtures / "dolly_mini.jsonl").string();
  EXPECT_EQ(Exec({"ingest", "--alpaca", alpaca, "--dolly", dolly, "--out-dir", dir_.string(),
                  "--expect-count", "total=20,dolly=8"})
                .code,
            0);
  const CliRun bad = Exec({"ingest", "--alpaca", alpaca, "--dolly", dolly, "--out-dir",
                        dir_.string(), "--expect-count", "21"});
  EXPECT_EQ(bad.code, kExitValidation);
  EXPECT_EQ(bad.ErrorRecord()["error"], "ExpectedCountMismatch");
  EXPECT_EQ(bad.ErrorRecord()["exit_code"], kExitValidation);

  const CliRun only = Exec({"ingest", "--dolly", dolly, "--out-dir", dir_.string()});
  ASSERT_EQ(only.code, 0);
  EXPECT_EQ(json::parse(only.out)["counts"], json({{"dolly", 8}}));
}

TEST_F(CliTest, UsageAndConfigErrorsExitTwo) {
  EXPECT_EQ(Exec({}).code, kExitUsage);
  EXPECT_EQ(Exec({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Exec({"mix", "--bogus"}).code, kExitUsage);
  const fs::path corpus = IngestFixtures();
  const CliRun p = Exec({"mix", "--corpus", corpus.string(), "--proportion", "1.5"});
  EXPECT_EQ(p.code, kExitUsage);
  EXPECT_EQ(p.ErrorRecord()["error"], "ConfigError");
  EXPECT_EQ(Exec({"mix", "--corpus", corpus.string(), "--predictor", "remote"}).code, kExitUsage);
  EXPECT_EQ(Exec({"mix", "--corpus", corpus.string(), "--strategies", "shuffle"}).code, kExitUsage);
  EXPECT_EQ(Exec({"mix"}).code, kExitUsage);
  EXPECT_EQ(Exec({"mix", "--corpus", corpus.string(), "--typo-kinds", "swap"}).code, kExitUsage);
  EXPECT_EQ(Exec({"mix", "--help"}).code, kExitOk);
}

TEST_F(CliTest, IoAndParseErrorsExitThree) {
  const CliRun missing = Exec({"ingest", "--alpaca", (dir_ / "nope.json").string(), "--out-dir", dir_.string()});
  EXPECT_EQ(missing.code, kExitFailure);
  EXPECT_EQ(missing.ErrorRecord()["error"], "IoError");
  WriteFileAtomic(dir_ / "bad.jsonl", "{\"instruction\":\"a\",\"context\":\"\",\"response\":\"b\"}\n{\"instr");
  const CliRun bad = Exec({"ingest", "--dolly", (dir_ / "bad.jsonl").string(), "--out-dir", dir_.string()});
  EXPECT_EQ(bad.code, kExitFailure);
  EXPECT_EQ(bad.ErrorRecord()["error"], "MalformedRecord");
  EXPECT_NE(bad.ErrorRecord()["message"].get<std::string>().find("line 2"), std::string::npos);
}

TEST_F(CliTest, MixWritesFiveVerifiedFilesDeterministically) {
  const fs::path corpus = IngestFixtures();
  const fs::path out = dir_ / "mix";
  const CliRun r = Exec({"mix", "--corpus", corpus.string(), "--out-dir", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::map<std::string, std::string> sums;
  for (const char* label : {"000", "025", "050", "075", "100"}) {
    const fs::path file = out / (std::string("mix-") + label + ".jsonl");
    ASSERT_TRUE(fs::exists(file)) << file;
    const json m = json::parse(ReadFile(ManifestPathFor(file)));
    EXPECT_EQ(m["checksums"]["output_sha256"], Sha256File(file));
    sums[label] = Sha256File(file);
    EXPECT_EQ(Exec({"validate", file.string()}).code, 0);
  }
  const auto mix100 = ParseMixtureJsonl(ReadFile(out / "mix-100.jsonl"), "m");
  for (const auto& s : mix100) EXPECT_TRUE(s.perturbation.strategy.has_value());

  ASSERT_EQ(Exec({"mix", "--corpus", corpus.string(), "--out-dir", out.string(), "--workers", "1"}).code, 0);
  for (const auto& [label, sum] : sums) {
    EXPECT_EQ(Sha256File(out / ("mix-" + label + ".jsonl")), sum) << label;
  }
  ASSERT_EQ(Exec({"mix", "--corpus", corpus.string(), "--out-dir", out.string(), "--seed", "7",
                  "--proportion", "0.25"}).code, 0);
  EXPECT_NE(Sha256File(out / "mix-025.jsonl"), sums["025"]);
}

TEST_F(CliTest, LogLinesAreStructured) {
  const fs::path corpus = IngestFixtures();
  const CliRun r = Exec({"mix", "--corpus", corpus.string(), "--out-dir", dir_.string(),
                      "--proportion", "0.5"});
  ASSERT_EQ(r.code, 0);
  const std::regex line(R"(\d{4}-\d\d-\d\dT\d\d:\d\d:\d\d\.\d{3}Z level=(info|warning|error|debug) event=\w+.*)");
  std::istringstream in(r.err);
  std::string l;
  size_t lines = 0;
  while (std::getline(in, l)) {
    ++lines;
    EXPECT_TRUE(std::regex_match(l, line)) << l;
  }
  EXPECT_GT(lines, 0u);
  EXPECT_NO_THROW(json::parse(r.out));
}

TEST_F(CliTest, ConfigFileEnvAndFlagPrecedence) {
  const fs::path corpus = IngestFixtures();
  const fs::path cfg = dir_ / "config.json";
  WriteFileAtomic(cfg, json{{"corpus", corpus.string()}, {"out_dir", (dir_ / "a").string()},
                            {"proportion", {0.5}}, {"seed", 1}}.dump());
  ASSERT_EQ(Exec({"mix", "--config", cfg.string()}).code, 0);
  const json from_file = json::parse(ReadFile(dir_ / "a" / "mix-050.manifest.json"));
  EXPECT_EQ(from_file["spec"]["seed"], 1);

  env_["NOISY_SEED"] = "2";
  ASSERT_EQ(Exec({"mix", "--config", cfg.string()}).code, 0);
  EXPECT_EQ(json::parse(ReadFile(dir_ / "a" / "mix-050.manifest.json"))["spec"]["seed"], 2);

  ASSERT_EQ(Exec({"mix", "--config", cfg.string(), "--seed", "3"}).code, 0);
  EXPECT_EQ(json::parse(ReadFile(dir_ / "a" / "mix-050.manifest.json"))["spec"]["seed"], 3);

  env_["NOISY_PROPORTION"] = "0.25,0.75";
  ASSERT_EQ(Exec({"mix", "--config", cfg.string()}).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "a" / "mix-075.jsonl"));

  WriteFileAtomic(dir_ / "broken.json", "{not json");
  EXPECT_EQ(Exec({"mix", "--config", (dir_ / "broken.json").string()}).code, kExitUsage);
  WriteFileAtomic(dir_ / "unknown.json", R"({"colour":"red"})");
  EXPECT_EQ(Exec({"mix", "--config", (dir_ / "unknown.json").string()}).code, kExitUsage);
}

TEST_F(CliTest, ValidateCatchesTampering) {
  const fs::path corpus = IngestFixtures();
  ASSERT_EQ(Exec({"mix", "--corpus", corpus.string(), "--out-dir", dir_.string(),
                  "--proportion", "1.0"}).code, 0);
  const fs::path file = dir_ / "mix-100.jsonl";
  auto samples = ParseMixtureJsonl(ReadFile(file), "m");
  samples[0].sample.instruction = "Hand edited instruction";
  WriteFileAtomic(file, MixtureToJsonl(samples));

  const CliRun stale = Exec({"validate", file.string()});
  EXPECT_EQ(stale.code, kExitValidation);
  const json report = json::parse(stale.out);
  std::map<std::string, std::string> status;
  for (const auto& c : report["checks"]) status[c["check"]] = c["status"];
  EXPECT_EQ(status["edit_replay"], "fail");
  EXPECT_EQ(status["manifest_checksum"], "fail");

  // Refresh the checksum so only the replay check fails.
  json manifest = json::parse(ReadFile(ManifestPathFor(file)));
  manifest["checksums"]["output_sha256"] = Sha256File(file);
  WriteFileAtomic(ManifestPathFor(file), manifest.dump());
  const json again = json::parse(Exec({"validate", file.string()}).out);
  for (const auto& c : again["checks"]) {
    EXPECT_EQ(c["status"], c["check"] == "edit_replay" ? "fail" : "pass") << c.dump();
  }

  fs::remove(ManifestPathFor(file));
  EXPECT_EQ(Exec({"validate", file.string()}).code, kExitFailure);
}

TEST_F(CliTest, StatsReportsCountLaws) {
  const fs::path corpus = IngestFixtures();
  ASSERT_EQ(Exec({"mix", "--corpus", corpus.string(), "--out-dir", dir_.string(),
                  "--proportion", "1.0", "--ratio", "0.5"}).code, 0);
  const fs::path file = dir_ / "mix-100.jsonl";
  const std::string before = ReadFile(file);
  const CliRun r = Exec({"stats", file.string(), "--json", "--ratio", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json stats = json::parse(r.out);
  EXPECT_EQ(stats["total"], 28);
  EXPECT_EQ(stats["perturbed"], 28);
  EXPECT_EQ(stats["sha256"], Sha256File(file));
  for (const auto& [name, st] : stats["per_strategy"].items()) {
    EXPECT_EQ(st["count_law_violations"], 0) << name;
  }
  EXPECT_LE(stats["per_strategy"]["delete_stop_words"]["word_delta"]["max"].get<long>(), 0);
  for (const auto& [d, c] : stats["misspelling_edit_distance"].items()) EXPECT_EQ(d, "1");
  EXPECT_EQ(ReadFile(file), before);
  EXPECT_EQ(stats["typo_kinds"].count("transpose_letters"), 0u);

  ASSERT_EQ(Exec({"mix", "--corpus", corpus.string(), "--out-dir", (dir_ / "all").string(),
                  "--proportion", "1.0", "--ratio", "1.0", "--typo-kinds", "all"}).code, 0);
  const json manifest = json::parse(ReadFile(dir_ / "all" / "mix-100.manifest.json"));
  EXPECT_EQ(manifest["spec"]["typo_kinds"].size(), 4u);
  EXPECT_EQ(Exec({"validate", (dir_ / "all" / "mix-100.jsonl").string()}).code, 0);
  const CliRun text = Exec({"stats", file.string()});
  EXPECT_EQ(text.code, 0);
  EXPECT_NE(text.out.find("add_misspelling"), std::string::npos);
}

TEST_F(CliTest, OsaDistanceMatchesOracle) {
  testing::InstructionGenerator gen(3);
  for (int i = 0; i < 500; ++i) {
    const std::string a = gen.Next(2), b = gen.Next(2);
    const size_t lev = testing::Levenshtein(a, b);
    const size_t osa = OsaDistance(a, b);
    EXPECT_LE(osa, lev);
  }
  EXPECT_EQ(OsaDistance("form", "from"), 1u);
  EXPECT_EQ(OsaDistance("given", "givdn"), 1u);
  EXPECT_EQ(OsaDistance("", "abc"), 3u);
  EXPECT_EQ(OsaDistance("ca", "abc"), 3u);
}

TEST_F(CliTest, EvalSetWritesFiveAlignedFiles) {
  const fs::path in = kFixtures / "eval_instructions_600.txt";
  const CliRun r = Exec({"eval-set", "--instructions", in.string(), "--out-dir", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = ReadInstructionFile(in);
  ASSERT_EQ(lines.size(), 600u);
  for (const char* label : {"000", "025", "050", "075", "100"}) {
    std::istringstream file(ReadFile(dir_ / (std::string("eval-") + label + ".jsonl")));
    std::string l;
    size_t i = 0;
    std::map<std::string, size_t> tags;
    while (std::getline(file, l)) {
      const json j = json::parse(l);
      ASSERT_EQ(j["index"], i);
      ASSERT_EQ(j["original_instruction"], lines[i]);
      if (std::string(label) == "000") {
        ASSERT_TRUE(j["strategy"].is_null());
        ASSERT_EQ(j["instruction"], lines[i]);
      }
      if (!j["strategy"].is_null()) ++tags[j["strategy"]];
      ++i;
    }
    EXPECT_EQ(i, 600u);
    if (std::string(label) == "100") {
      ASSERT_EQ(tags.size(), 6u);
      for (const auto& [name, c] : tags) EXPECT_EQ(c, 100u) << name;
    }
  }
}

TEST_F(CliTest, RemoteFailureLeavesNoPartialFileAndResumes) {
  const fs::path corpus = IngestFixtures();
  const fs::path out = dir_ / "remote";
  {
    testing::StubServer down([](const httplib::Request&, httplib::Response& res) {
      res.status = 503;
    });
    const CliRun r = Exec({"mix", "--corpus", corpus.string(), "--out-dir", out.string(),
                        "--proportion", "1.0", "--predictor", "remote",
                        "--predictor-url", down.url()});
    EXPECT_EQ(r.code, kExitFailure);
    EXPECT_EQ(r.ErrorRecord()["error"], "PredictorUnavailable");
    EXPECT_FALSE(fs::exists(out / "mix-100.jsonl"));
    EXPECT_FALSE(fs::exists(out / "mix-100.manifest.json"));
    EXPECT_TRUE(fs::exists(out / "mix-100.resume.jsonl"));
  }
  {
    testing::StubServer up(testing::StubServer::Filling("word"));
    const CliRun r = Exec({"mix", "--corpus", corpus.string(), "--out-dir", out.string(),
                        "--proportion", "1.0", "--predictor", "remote",
                        "--predictor-url", up.url()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(out / "mix-100.jsonl"));
    EXPECT_FALSE(fs::exists(out / "mix-100.resume.jsonl"));
    EXPECT_EQ(json::parse(ReadFile(out / "mix-100.manifest.json"))["predictor"], "remote");
  }
}

TEST_F(CliTest, RemoteArityMismatchFails) {
  const fs::path corpus = IngestFixtures();
  testing::StubServer liar([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"words":[],"model":"m"})", "application/json");
  });
  const CliRun r = Exec({"mix", "--corpus", corpus.string(), "--out-dir", dir_.string(),
                      "--proportion", "1.0", "--predictor", "remote",
                      "--predictor-url", liar.url()});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_EQ(r.ErrorRecord()["error"], "MalformedResponse");
  EXPECT_FALSE(fs::exists(dir_ / "mix-100.jsonl"));
}

}  // namespace
}  // namespace noisy::cli
