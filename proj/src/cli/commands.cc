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

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <iostream>
#include <sstream>

#include "noisy/cli.h"
#include "noisy/digest.h"
#include "noisy/errors.h"
#include "noisy/textseg.h"

namespace noisy::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::shared_ptr<spdlog::logger> MakeLogger(std::ostream& sink_stream) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(sink_stream, true);
  auto logger = std::make_shared<spdlog::logger>("noisy", std::move(sink));
  logger->set_pattern("%Y-%m-%dT%H:%M:%S.%eZ level=%l %v", spdlog::pattern_time_type::utc);
  return logger;
}

std::shared_ptr<spdlog::logger>& Log() {
  static std::shared_ptr<spdlog::logger> logger = MakeLogger(std::cerr);
  return logger;
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
}

std::string SourceChecksum(const fs::path& path) {
  if (!fs::is_directory(path)) return Sha256File(path);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::string listing;
  for (const auto& f : files) {
    listing += f.filename().string() + " " + Sha256File(f) + "\n";
  }
  return Sha256Hex(listing);
}

std::string Pretty(const json& j) { return j.dump(2) + "\n"; }

bool NeedsPredictor(const RunConfig& config, double proportion) {
  return proportion > 0 &&
         std::any_of(config.strategies.begin(), config.strategies.end(),
                     [](PerturbationStrategy s) { return noisy::NeedsPredictor(s); });
}

std::map<std::string, size_t> StrategyCounts(
    const std::vector<std::optional<PerturbationStrategy>>& tags,
    const std::vector<PerturbationStrategy>& enabled) {
  std::map<std::string, size_t> counts;
  for (PerturbationStrategy s : enabled) counts[std::string(StrategyName(s))] = 0;
  for (const auto& t : tags) {
    if (t) ++counts[std::string(StrategyName(*t))];
  }
  return counts;
}

void LogReport(const std::string& file, const VerifyReport& report) {
  for (const auto& c : report.checks) {
    const char* status = c.status == CheckStatus::kPass   ? "pass"
                         : c.status == CheckStatus::kFail ? "fail"
                                                          : "skip";
    Log()->log(c.status == CheckStatus::kFail ? spdlog::level::err : spdlog::level::info,
               "event=verify file={} check={} status={}{}", file, c.name, status,
               c.details.empty() ? "" : " detail=\"" + c.details.front() + "\"");
  }
}

// Resume files start with a header line binding them to one (spec, corpus).
json ResumeHeader(const MixtureSpec& spec, const std::string& corpus_sha) {
  return {{"resume", {{"spec", spec.ToJson()}, {"corpus_sha256", corpus_sha}}}};
}

std::map<std::string, PerturbedSample> LoadResume(const fs::path& path,
                                                  const json& header) {
  std::map<std::string, PerturbedSample> done;
  if (!fs::exists(path)) return done;
  const std::string text = ReadFile(path);
  const size_t eol = text.find('\n');
  try {
    if (json::parse(text.substr(0, eol)) != header) {
      Log()->warn("event=resume_ignored file={} reason=\"spec or corpus changed\"",
                  path.string());
      return done;
    }
  } catch (const json::exception&) {
    Log()->warn("event=resume_ignored file={} reason=\"unreadable header\"", path.string());
    return done;
  }
  if (eol == std::string::npos) return done;
  for (auto& s : ParseMixtureJsonl(std::string_view(text).substr(eol + 1), path.string())) {
    std::string id = s.sample.id;
    done.emplace(std::move(id), std::move(s));
  }
  Log()->info("event=resume file={} reused={}", path.string(), done.size());
  return done;
}

}  // namespace

fs::path ManifestPathFor(const fs::path& data_file) {
  fs::path p = data_file;
  p.replace_extension(".manifest.json");
  return p;
}

IngestResult CmdIngest(const RunConfig& config) {
  if (!config.alpaca && !config.dolly && !config.supernatural) {
    throw ConfigError("ingest needs at least one of --alpaca, --supernatural, --dolly");
  }
  std::vector<std::vector<InstructionSample>> parts;
  std::map<std::string, std::string> sources;
  if (config.alpaca) {
    parts.push_back(ParseAlpacaFile(*config.alpaca));
    sources[config.alpaca->string()] = SourceChecksum(*config.alpaca);
    Log()->info("event=parsed dataset=gpt4-alpaca samples={}", parts.back().size());
  }
  if (config.supernatural) {
    parts.push_back(ParseSupernatural(
        *config.supernatural, SupernaturalOptions{config.supernatural_cap, config.seed}));
    sources[config.supernatural->string()] = SourceChecksum(*config.supernatural);
    Log()->info("event=parsed dataset=supernatural samples={}", parts.back().size());
  }
  if (config.dolly) {
    parts.push_back(ParseDollyFile(*config.dolly));
    sources[config.dolly->string()] = SourceChecksum(*config.dolly);
    Log()->info("event=parsed dataset=dolly samples={}", parts.back().size());
  }
  Corpus corpus = Combine(std::move(parts));
  corpus.manifest.sources = std::move(sources);

  EnsureDir(config.out_dir);
  IngestResult result;
  result.manifest = corpus.manifest;
  result.corpus_file = config.out_dir / "corpus.jsonl";
  result.manifest_file = config.out_dir / "corpus.manifest.json";
  const std::string jsonl = CorpusToJsonl(corpus.samples);
  WriteFileAtomic(result.corpus_file, jsonl);
  json manifest = corpus.manifest.ToJson();
  manifest["corpus_sha256"] = Sha256Hex(jsonl);
  WriteFileAtomic(result.manifest_file, Pretty(manifest));
  Log()->info("event=ingest total={} corpus={}", corpus.manifest.total,
              result.corpus_file.string());

  std::string mismatches;
  for (const auto& [name, expected] : config.expect_counts) {
    size_t actual = corpus.manifest.total;
    if (name != "total") {
      const auto it = corpus.manifest.counts.find(name);
      actual = it == corpus.manifest.counts.end() ? 0 : it->second;
    }
    if (actual != expected) {
      if (!mismatches.empty()) mismatches += "; ";
      mismatches += name + ": expected " + std::to_string(expected) + ", got " +
                    std::to_string(actual);
    }
  }
  if (!mismatches.empty()) throw ExpectedCountMismatch(mismatches);
  return result;
}

std::vector<MixFileResult> CmdMix(const RunConfig& config) {
  if (config.corpus.empty()) throw ConfigError("mix requires --corpus");
  const std::string corpus_bytes = ReadFile(config.corpus);
  const std::string corpus_sha = Sha256Hex(corpus_bytes);
  const std::vector<InstructionSample> corpus =
      ParseCorpusJsonl(corpus_bytes, config.corpus.string());
  EnsureDir(config.out_dir);

  std::unique_ptr<MaskPredictor> predictor;
  std::vector<MixFileResult> results;
  for (double proportion : config.proportions) {
    const MixtureSpec spec = config.SpecFor(proportion);
    if (NeedsPredictor(config, proportion) && !predictor) {
      predictor = MakePredictor(config);
      Log()->info("event=predictor kind={}", predictor->Kind());
    }
    const std::string stem = "mix-" + ProportionLabel(proportion);
    MixFileResult r;
    r.proportion = proportion;
    r.output_file = config.out_dir / (stem + ".jsonl");
    r.manifest_file = ManifestPathFor(r.output_file);
    const fs::path resume_file = config.out_dir / (stem + ".resume.jsonl");

    const json header = ResumeHeader(spec, corpus_sha);
    const auto resume = LoadResume(resume_file, header);
    std::vector<PerturbedSample> completed;
    BuildOptions options;
    options.workers = config.workers;
    options.resume = resume.empty() ? nullptr : &resume;
    options.completed_on_failure = &completed;

    std::vector<PerturbedSample> output;
    try {
      output = Build(corpus, spec, predictor.get(), options);
    } catch (const Error& e) {
      std::string text = header.dump() + "\n" + MixtureToJsonl(completed);
      WriteFileAtomic(resume_file, text);
      Log()->error("event=build_failed proportion={} completed={} resume={} error=\"{}\"",
                   proportion, completed.size(), resume_file.string(), e.what());
      throw;
    }

    r.report = Verify(output, spec, &corpus);
    LogReport(r.output_file.filename().string(), r.report);
    const std::string jsonl = MixtureToJsonl(output);

    MixtureManifest m;
    m.spec = spec;
    m.total = output.size();
    std::vector<std::optional<PerturbationStrategy>> tags;
    for (const auto& s : output) tags.push_back(s.perturbation.strategy);
    m.per_strategy = StrategyCounts(tags, spec.strategies);
    for (const auto& [name, c] : m.per_strategy) m.perturbed += c;
    m.kept = m.total - m.perturbed;
    m.output_file = r.output_file.filename().string();
    m.output_sha256 = Sha256Hex(jsonl);
    m.corpus_file = config.corpus.string();
    m.corpus_sha256 = corpus_sha;
    m.predictor = predictor && NeedsPredictor(config, proportion) ? predictor->Kind() : "none";
    m.stop_words_sha256 = StopWordList::Shipped().checksum();

    WriteFileAtomic(r.output_file, jsonl);
    WriteFileAtomic(r.manifest_file, Pretty(m.ToJson()));
    std::error_code ec;
    fs::remove(resume_file, ec);
    Log()->info("event=mix proportion={} total={} perturbed={} sha256={} file={}",
                proportion, m.total, m.perturbed, m.output_sha256,
                r.output_file.string());
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<std::string> ReadInstructionFile(const fs::path& path) {
  const std::string text = ReadFile(path);
  if (auto bad = FindInvalidUtf8(text)) {
    throw MalformedRecord(path.string(), "byte " + std::to_string(*bad), "invalid UTF-8");
  }
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (NormalizeWhitespace(line).empty()) continue;
    lines.push_back(line);
  }
  const bool jsonl = !lines.empty() && std::all_of(lines.begin(), lines.end(), [](const std::string& l) {
    const auto first = l.find_first_not_of(" \t");
    return first != std::string::npos && l[first] == '{';
  });
  if (!jsonl) return lines;
  std::vector<std::string> out;
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string where = "record " + std::to_string(i);
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      throw MalformedRecord(path.string(), where, e.what());
    }
    if (!j.is_object() || !j.contains("instruction") || !j["instruction"].is_string()) {
      throw MalformedRecord(path.string(), where, "missing string field \"instruction\"");
    }
    out.push_back(j["instruction"].get<std::string>());
  }
  return out;
}

std::vector<EvalFileResult> CmdEvalSet(const RunConfig& config) {
  if (config.instructions.empty()) throw ConfigError("eval-set requires --instructions");
  const std::vector<std::string> instructions = ReadInstructionFile(config.instructions);
  if (instructions.empty()) {
    throw MalformedRecord(config.instructions.string(), "document", "no instructions");
  }
  const std::string source_sha = Sha256File(config.instructions);
  EnsureDir(config.out_dir);

  std::unique_ptr<MaskPredictor> predictor;
  std::vector<EvalFileResult> results;
  for (double proportion : config.proportions) {
    const MixtureSpec spec = config.SpecFor(proportion);
    if (NeedsPredictor(config, proportion) && !predictor) predictor = MakePredictor(config);
    const std::vector<EvalItem> items =
        PerturbEvalSet(instructions, spec, predictor.get(), config.workers);
    const VerifyReport report = VerifyEvalSet(items, instructions, spec);

    EvalFileResult r;
    r.proportion = proportion;
    r.output_file = config.out_dir / ("eval-" + ProportionLabel(proportion) + ".jsonl");
    r.manifest_file = ManifestPathFor(r.output_file);
    LogReport(r.output_file.filename().string(), report);
    r.report = report;

    std::vector<std::optional<PerturbationStrategy>> tags;
    for (const auto& item : items) tags.push_back(item.perturbation.strategy);
    r.per_strategy = StrategyCounts(tags, spec.strategies);

    const std::string jsonl = EvalSetToJsonl(items);
    MixtureManifest m;
    m.spec = spec;
    m.total = items.size();
    m.per_strategy = r.per_strategy;
    for (const auto& [name, c] : m.per_strategy) m.perturbed += c;
    m.kept = m.total - m.perturbed;
    m.output_file = r.output_file.filename().string();
    m.output_sha256 = Sha256Hex(jsonl);
    m.corpus_file = config.instructions.string();
    m.corpus_sha256 = source_sha;
    m.predictor = predictor && NeedsPredictor(config, proportion) ? predictor->Kind() : "none";
    m.stop_words_sha256 = StopWordList::Shipped().checksum();
    WriteFileAtomic(r.output_file, jsonl);
    WriteFileAtomic(r.manifest_file, Pretty(m.ToJson()));
    Log()->info("event=eval_set proportion={} total={} perturbed={} file={}", proportion,
                m.total, m.perturbed, r.output_file.string());
    results.push_back(std::move(r));
  }
  return results;
}

VerifyReport CmdValidate(const fs::path& mixture,
                         const std::optional<fs::path>& corpus_override) {
  const fs::path manifest_path = ManifestPathFor(mixture);
  if (!fs::exists(manifest_path)) {
    throw IoError("sidecar manifest not found: " + manifest_path.string());
  }
  MixtureManifest manifest;
  try {
    manifest = MixtureManifest::FromJson(json::parse(ReadFile(manifest_path)));
  } catch (const json::exception& e) {
    throw MalformedRecord(manifest_path.string(), "document", e.what());
  }
  const std::string bytes = ReadFile(mixture);
  const std::vector<PerturbedSample> output = ParseMixtureJsonl(bytes, mixture.string());

  VerifyReport head;
  head.checks.push_back({"manifest_checksum", CheckStatus::kPass, {}});
  if (Sha256Hex(bytes) != manifest.output_sha256) {
    head.checks.back().status = CheckStatus::kFail;
    head.checks.back().details.push_back(mixture.string() +
                                         ": sha256 does not match its manifest");
  }

  head.checks.push_back({"manifest_counts", CheckStatus::kPass, {}});
  {
    std::vector<std::optional<PerturbationStrategy>> tags;
    for (const auto& s : output) tags.push_back(s.perturbation.strategy);
    const auto counts = StrategyCounts(tags, manifest.spec.strategies);
    if (output.size() != manifest.total || counts != manifest.per_strategy) {
      head.checks.back().status = CheckStatus::kFail;
      head.checks.back().details.push_back("record counts differ from the manifest");
    }
  }

  std::optional<std::vector<InstructionSample>> corpus;
  head.checks.push_back({"corpus_checksum", CheckStatus::kPass, {}});
  const fs::path corpus_path = corpus_override ? *corpus_override : fs::path(manifest.corpus_file);
  if (!corpus_path.empty() && fs::exists(corpus_path)) {
    const std::string corpus_bytes = ReadFile(corpus_path);
    if (!corpus_override && Sha256Hex(corpus_bytes) != manifest.corpus_sha256) {
      head.checks.back().status = CheckStatus::kFail;
      head.checks.back().details.push_back(corpus_path.string() +
                                           ": sha256 does not match the manifest");
    } else {
      corpus = ParseCorpusJsonl(corpus_bytes, corpus_path.string());
    }
  } else {
    head.checks.back().status = CheckStatus::kSkip;
    head.checks.back().details.push_back("source corpus not available");
  }

  VerifyReport body = Verify(output, manifest.spec, corpus ? &*corpus : nullptr);
  head.checks.insert(head.checks.end(), body.checks.begin(), body.checks.end());
  LogReport(mixture.filename().string(), head);
  return head;
}

}  // namespace noisy::cli

namespace noisy::cli {
namespace {

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return kExitUsage;
    case ErrorKind::kExpectedCountMismatch: return kExitValidation;
    default: return kExitFailure;
  }
}

void WriteErrorRecord(std::ostream& err, std::string_view kind, std::string_view message,
                      int code) {
  err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
}

// Options shared by every subcommand; values land in `flags` keyed by
// setting name.
void AddSharedOptions(CLI::App* cmd, std::map<std::string, std::string>& flags,
                      std::optional<std::string>& config_file) {
  const auto opt = [&](const std::string& flag, const std::string& key,
                       const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [&flags, key](const std::string& v) { flags[key] = v; }, help);
  };
  cmd->add_option_function<std::string>(
      "--config", [&config_file](const std::string& v) { config_file = v; },
      "JSON config file; flags and NOISY_* variables override it");
  opt("--seed", "seed", "global seed (default 42)");
  opt("--out-dir", "out_dir", "output directory");
  opt("--proportion", "proportion", "perturbed fraction(s), comma separated");
  opt("--ratio", "ratio", "fraction of words each strategy touches (default 0.25)");
  opt("--strategies", "strategies", "comma-separated strategy names, or all");
  opt("--typo-kinds", "typo_kinds",
      "comma-separated typo kinds for add_misspelling, or all");
  opt("--predictor", "predictor", "offline | remote");
  opt("--predictor-url", "predictor_url", "base URL of the fill-mask service");
  opt("--predictor-timeout-ms", "predictor_timeout_ms", "request timeout");
  opt("--predictor-max-in-flight", "predictor_max_in_flight", "concurrent requests");
  opt("--workers", "workers", "worker threads (0 = all cores)");
  opt("--expect-count", "expect_count", "N or name=N,... (total, gpt4-alpaca, supernatural, dolly)");
}

void AddOption(CLI::App* cmd, std::map<std::string, std::string>& flags,
               const std::string& flag, const std::string& key, const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&flags, key](const std::string& v) { flags[key] = v; }, help);
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
           const EnvLookup& env) {
  auto previous = Log();
  Log() = MakeLogger(err);
  struct Restore {
    std::shared_ptr<spdlog::logger> logger;
    ~Restore() { Log() = logger; }
  } restore{previous};

  CLI::App app{"Builds noisy-instruction fine-tuning and evaluation datasets.",
               "noisy-instruct"};
  app.require_subcommand(1);
  std::map<std::string, std::string> flags;
  std::optional<std::string> config_file;
  std::string data_file;
  std::optional<std::string> corpus_override;
  bool stats_json = false;

  CLI::App* ingest = app.add_subcommand("ingest", "parse source datasets into a unified corpus");
  AddSharedOptions(ingest, flags, config_file);
  AddOption(ingest, flags, "--alpaca", "alpaca", "GPT4-Alpaca JSON array");
  AddOption(ingest, flags, "--dolly", "dolly", "Dolly JSONL");
  AddOption(ingest, flags, "--supernatural", "supernatural", "Super-Natural task file or directory");
  AddOption(ingest, flags, "--supernatural-cap", "supernatural_cap", "max instances per task");

  CLI::App* mix = app.add_subcommand("mix", "build perturbation mixtures from a corpus");
  AddSharedOptions(mix, flags, config_file);
  AddOption(mix, flags, "--corpus", "corpus", "corpus.jsonl written by ingest");
  AddOption(mix, flags, "--shuffle-output-order", "shuffle_output_order", "true|false");

  CLI::App* eval = app.add_subcommand("eval-set", "perturb an evaluation instruction list");
  AddSharedOptions(eval, flags, config_file);
  AddOption(eval, flags, "--instructions", "instructions", "one instruction per line, or JSONL");

  CLI::App* stats = app.add_subcommand("stats", "summarize a mixture file");
  AddSharedOptions(stats, flags, config_file);
  stats->add_option("mixture", data_file, "mixture JSONL")->required();
  stats->add_flag("--json", stats_json, "print JSON instead of text");

  CLI::App* validate = app.add_subcommand("validate", "re-check a mixture against its manifest");
  AddSharedOptions(validate, flags, config_file);
  validate->add_option("mixture", data_file, "mixture JSONL")->required();
  validate->add_option("--corpus", corpus_override, "source corpus (default: from manifest)");

  std::vector<const char*> argv;
  argv.push_back("noisy-instruct");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    WriteErrorRecord(err, "usage", e.what(), kExitUsage);
    return kExitUsage;
  }

  try {
    const RunConfig config = ResolveConfig(
        config_file ? std::optional<fs::path>(*config_file) : std::nullopt, env, flags);
    if (ingest->parsed()) {
      const IngestResult r = CmdIngest(config);
      out << Pretty(r.manifest.ToJson());
      return kExitOk;
    }
    if (mix->parsed()) {
      bool ok = true;
      json summary = json::array();
      for (const auto& r : CmdMix(config)) {
        ok = ok && r.report.ok();
        summary.push_back({{"proportion", r.proportion},
                           {"file", r.output_file.string()},
                           {"ok", r.report.ok()}});
      }
      out << Pretty(summary);
      return ok ? kExitOk : kExitValidation;
    }
    if (eval->parsed()) {
      bool ok = true;
      json summary = json::array();
      for (const auto& r : CmdEvalSet(config)) {
        ok = ok && r.report.ok();
        summary.push_back({{"proportion", r.proportion},
                           {"file", r.output_file.string()},
                           {"per_strategy", r.per_strategy},
                           {"ok", r.report.ok()}});
      }
      out << Pretty(summary);
      return ok ? kExitOk : kExitValidation;
    }
    if (stats->parsed()) {
      std::optional<double> ratio;
      if (flags.contains("ratio")) ratio = config.ratio;
      const StatsReport report = CmdStats(data_file, ratio);
      out << (stats_json ? Pretty(report.ToJson()) : report.ToText());
      return kExitOk;
    }
    if (validate->parsed()) {
      const VerifyReport report = CmdValidate(
          data_file, corpus_override ? std::optional<fs::path>(*corpus_override) : std::nullopt);
      out << Pretty(report.ToJson());
      return report.ok() ? kExitOk : kExitValidation;
    }
  } catch (const Error& e) {
    const int code = ExitCodeFor(e.kind());
    Log()->error("event=failed error={} message=\"{}\"", ErrorKindName(e.kind()), e.what());
    WriteErrorRecord(err, ErrorKindName(e.kind()), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    WriteErrorRecord(err, "internal", e.what(), kExitFailure);
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace noisy::cli
