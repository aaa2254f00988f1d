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

#include "noisy/ingest.h"

#include <algorithm>
#include <cstdio>
#include <set>

#include "noisy/digest.h"
#include "noisy/errors.h"
#include "noisy/rng.h"
#include "noisy/textseg.h"

namespace noisy {

using nlohmann::json;

namespace {

bool IsBlank(std::string_view s) { return std::all_of(s.begin(), s.end(), IsSpace); }

// Calls fn(line, 1-based line number) for each line of a JSONL document.
template <typename Fn>
void ForEachLine(std::string_view contents, Fn&& fn) {
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < contents.size()) {
    size_t eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) eol = contents.size();
    ++line_no;
    fn(contents.substr(pos, eol - pos), line_no);
    pos = eol + 1;
  }
}

void RequireUtf8(std::string_view contents, std::string_view source) {
  if (auto bad = FindInvalidUtf8(contents)) {
    const size_t line = 1 + static_cast<size_t>(std::count(
                                contents.begin(), contents.begin() + *bad, '\n'));
    throw MalformedRecord(std::string(source), "line " + std::to_string(line),
                          "invalid UTF-8 at byte offset " + std::to_string(*bad));
  }
}

std::string RequireString(const json& obj, std::string_view field,
                          std::string_view source, const std::string& where) {
  const auto it = obj.find(field);
  if (it == obj.end()) {
    throw MalformedRecord(std::string(source), where,
                          "missing field \"" + std::string(field) + "\"");
  }
  if (!it->is_string()) {
    throw MalformedRecord(std::string(source), where,
                          "field \"" + std::string(field) + "\" is not a string");
  }
  return it->get<std::string>();
}

void RequireInstruction(const std::string& instruction, std::string_view source,
                        const std::string& where) {
  if (IsBlank(instruction)) {
    throw MalformedRecord(std::string(source), where, "empty instruction");
  }
}

std::optional<std::string> OptionalContext(std::string text) {
  if (text.empty()) return std::nullopt;
  return text;
}

json ParseJson(std::string_view text, std::string_view source,
               const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedRecord(std::string(source), where, e.what());
  }
}

}  // namespace

std::string_view DatasetTag(Dataset dataset) {
  switch (dataset) {
    case Dataset::kGpt4Alpaca: return "gpt4-alpaca";
    case Dataset::kSuperNatural: return "supernatural";
    case Dataset::kDolly: return "dolly";
  }
  return "unknown";
}

std::optional<Dataset> ParseDatasetTag(std::string_view tag) {
  for (Dataset d : kAllDatasets) {
    if (DatasetTag(d) == tag) return d;
  }
  return std::nullopt;
}

std::optional<size_t> FindInvalidUtf8(std::string_view bytes) {
  const auto* s = reinterpret_cast<const unsigned char*>(bytes.data());
  const size_t n = bytes.size();
  size_t i = 0;
  while (i < n) {
    const unsigned char c = s[i];
    if (c < 0x80) {
      ++i;
      continue;
    }
    size_t len;
    unsigned char lo = 0x80, hi = 0xbf;  // allowed range of the second byte
    if (c >= 0xc2 && c <= 0xdf) {
      len = 2;
    } else if (c >= 0xe0 && c <= 0xef) {
      len = 3;
      if (c == 0xe0) lo = 0xa0;
      if (c == 0xed) hi = 0x9f;
    } else if (c >= 0xf0 && c <= 0xf4) {
      len = 4;
      if (c == 0xf0) lo = 0x90;
      if (c == 0xf4) hi = 0x8f;
    } else {
      return i;
    }
    if (i + len > n) return i;
    if (s[i + 1] < lo || s[i + 1] > hi) return i;
    for (size_t k = 2; k < len; ++k) {
      if (s[i + k] < 0x80 || s[i + k] > 0xbf) return i;
    }
    i += len;
  }
  return std::nullopt;
}

std::string MakeSampleId(Dataset dataset, size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", ordinal);
  return std::string(DatasetTag(dataset)) + ":" + buf;
}

std::vector<InstructionSample> ParseAlpaca(std::string_view contents,
                                           std::string_view source) {
  RequireUtf8(contents, source);
  const json doc = ParseJson(contents, source, "document");
  if (!doc.is_array()) {
    throw MalformedRecord(std::string(source), "document",
                          "expected a JSON array of records");
  }
  std::vector<InstructionSample> samples;
  samples.reserve(doc.size());
  for (size_t i = 0; i < doc.size(); ++i) {
    const std::string where = "index " + std::to_string(i);
    const json& rec = doc[i];
    if (!rec.is_object()) {
      throw MalformedRecord(std::string(source), where, "record is not an object");
    }
    InstructionSample s;
    s.id = MakeSampleId(Dataset::kGpt4Alpaca, i);
    s.dataset = Dataset::kGpt4Alpaca;
    s.instruction = RequireString(rec, "instruction", source, where);
    s.context = OptionalContext(RequireString(rec, "input", source, where));
    s.response = RequireString(rec, "output", source, where);
    RequireInstruction(s.instruction, source, where);
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<InstructionSample> ParseAlpacaFile(const std::filesystem::path& path) {
  return ParseAlpaca(ReadFile(path), path.string());
}

std::vector<InstructionSample> ParseDolly(std::string_view contents,
                                          std::string_view source) {
  RequireUtf8(contents, source);
  std::vector<InstructionSample> samples;
  ForEachLine(contents, [&](std::string_view line, size_t line_no) {
    if (IsBlank(line)) return;
    const std::string where = "line " + std::to_string(line_no);
    const json rec = ParseJson(line, source, where);
    if (!rec.is_object()) {
      throw MalformedRecord(std::string(source), where, "record is not an object");
    }
    InstructionSample s;
    s.id = MakeSampleId(Dataset::kDolly, samples.size());
    s.dataset = Dataset::kDolly;
    s.instruction = RequireString(rec, "instruction", source, where);
    s.context = OptionalContext(RequireString(rec, "context", source, where));
    s.response = RequireString(rec, "response", source, where);
    RequireInstruction(s.instruction, source, where);
    samples.push_back(std::move(s));
  });
  return samples;
}

std::vector<InstructionSample> ParseDollyFile(const std::filesystem::path& path) {
  return ParseDolly(ReadFile(path), path.string());
}

std::vector<InstructionSample> ParseSupernaturalTask(
    std::string_view contents, std::string_view task_name,
    const SupernaturalOptions& options) {
  RequireUtf8(contents, task_name);
  const json doc = ParseJson(contents, task_name, "document");
  if (!doc.is_object()) {
    throw MalformedRecord(std::string(task_name), "document",
                          "task file is not a JSON object");
  }
  const auto instances = doc.find("Instances");
  if (instances == doc.end() || !instances->is_array()) {
    throw MalformedRecord(std::string(task_name), "document",
                          "missing \"Instances\" array");
  }
  if (instances->empty()) return {};

  const auto def = doc.find("Definition");
  std::string definition;
  if (def != doc.end() && def->is_string()) {
    definition = def->get<std::string>();
  } else if (def != doc.end() && def->is_array()) {
    for (const json& part : *def) {
      if (!part.is_string()) {
        throw MalformedRecord(std::string(task_name), "Definition",
                              "definition entries must be strings");
      }
      if (!definition.empty()) definition.push_back('\n');
      definition += part.get<std::string>();
    }
  } else {
    throw MalformedRecord(std::string(task_name), "document",
                          "missing \"Definition\"");
  }
  RequireInstruction(definition, task_name, "Definition");

  std::vector<size_t> keep(instances->size());
  for (size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  if (options.per_task_cap && *options.per_task_cap < keep.size()) {
    Rng rng = Rng::ForStream(options.seed, task_name, "supernatural:cap");
    keep = rng.SampleIndices(instances->size(), *options.per_task_cap);
    std::sort(keep.begin(), keep.end());
  }

  std::vector<InstructionSample> samples;
  samples.reserve(keep.size());
  for (size_t i : keep) {
    const std::string where = "Instances[" + std::to_string(i) + "]";
    const json& inst = (*instances)[i];
    if (!inst.is_object()) {
      throw MalformedRecord(std::string(task_name), where, "instance is not an object");
    }
    InstructionSample s;
    s.dataset = Dataset::kSuperNatural;
    s.instruction = definition;
    s.context = OptionalContext(RequireString(inst, "input", task_name, where));
    const auto out = inst.find("output");
    if (out != inst.end() && out->is_string()) {
      s.response = out->get<std::string>();
    } else if (out != inst.end() && out->is_array() && !out->empty() &&
               (*out)[0].is_string()) {
      s.response = (*out)[0].get<std::string>();
    } else {
      throw MalformedRecord(std::string(task_name), where,
                            "\"output\" must be a string or nonempty list of strings");
    }
    const auto native = inst.find("id");
    if (native != inst.end() && native->is_string() && !native->get<std::string>().empty()) {
      s.id = "supernatural:" + native->get<std::string>();
    } else {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%06zu", i);
      s.id = "supernatural:" + std::string(task_name) + ":" + buf;
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<InstructionSample> ParseSupernatural(
    const std::filesystem::path& path, const SupernaturalOptions& options) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) {
    throw IoError("no such file or directory: " + path.string());
  }
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  std::vector<InstructionSample> samples;
  for (const auto& file : files) {
    auto task = ParseSupernaturalTask(ReadFile(file), file.stem().string(), options);
    std::move(task.begin(), task.end(), std::back_inserter(samples));
  }
  return samples;
}

json CorpusManifest::ToJson() const {
  json j;
  j["counts"] = counts;
  j["total"] = total;
  j["sources"] = sources;
  return j;
}

CorpusManifest CorpusManifest::FromJson(const json& j) {
  CorpusManifest m;
  m.counts = j.at("counts").get<std::map<std::string, size_t>>();
  m.total = j.at("total").get<size_t>();
  if (j.contains("sources")) {
    m.sources = j.at("sources").get<std::map<std::string, std::string>>();
  }
  return m;
}

Corpus Combine(std::vector<std::vector<InstructionSample>> datasets) {
  Corpus corpus;
  std::set<std::string, std::less<>> seen;
  for (auto& part : datasets) {
    for (auto& s : part) {
      if (!seen.insert(s.id).second) throw DuplicateId(s.id);
      ++corpus.manifest.counts[std::string(DatasetTag(s.dataset))];
      corpus.samples.push_back(std::move(s));
    }
  }
  corpus.manifest.total = corpus.samples.size();
  return corpus;
}

json SampleToJson(const InstructionSample& sample) {
  json j;
  j["id"] = sample.id;
  j["dataset"] = DatasetTag(sample.dataset);
  j["instruction"] = sample.instruction;
  if (sample.context) j["context"] = *sample.context;
  j["response"] = sample.response;
  return j;
}

InstructionSample SampleFromJson(const json& j, std::string_view source,
                                 std::string_view where_view) {
  const std::string where(where_view);
  if (!j.is_object()) {
    throw MalformedRecord(std::string(source), where, "record is not an object");
  }
  InstructionSample s;
  s.id = RequireString(j, "id", source, where);
  const std::string tag = RequireString(j, "dataset", source, where);
  const auto dataset = ParseDatasetTag(tag);
  if (!dataset) {
    throw MalformedRecord(std::string(source), where, "unknown dataset \"" + tag + "\"");
  }
  s.dataset = *dataset;
  s.instruction = RequireString(j, "instruction", source, where);
  if (j.contains("context") && !j["context"].is_null()) {
    s.context = RequireString(j, "context", source, where);
  }
  s.response = RequireString(j, "response", source, where);
  return s;
}

std::string CorpusToJsonl(const std::vector<InstructionSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    out += SampleToJson(s).dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<InstructionSample> ParseCorpusJsonl(std::string_view contents,
                                                std::string_view source) {
  RequireUtf8(contents, source);
  std::vector<InstructionSample> samples;
  ForEachLine(contents, [&](std::string_view line, size_t line_no) {
    if (IsBlank(line)) return;
    const std::string where = "line " + std::to_string(line_no);
    samples.push_back(SampleFromJson(ParseJson(line, source, where), source, where));
  });
  return samples;
}

std::vector<InstructionSample> ReadCorpusFile(const std::filesystem::path& path) {
  return ParseCorpusJsonl(ReadFile(path), path.string());
}

}  // namespace noisy
