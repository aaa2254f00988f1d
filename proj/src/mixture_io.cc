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

#include "noisy/errors.h"
#include "noisy/ingest.h"
#include "noisy/mixture.h"

namespace noisy {

using nlohmann::json;

json EditToJson(const Edit& edit) {
  json j;
  j["kind"] = EditKindName(edit.kind);
  j["positions"] = edit.positions;
  if (edit.kind != EditKind::kInsert) j["before"] = edit.before;
  if (edit.kind != EditKind::kDelete) j["after"] = edit.after;
  if (!edit.detail.empty()) j["detail"] = edit.detail;
  return j;
}

Edit EditFromJson(const json& j) {
  Edit edit;
  const auto kind = ParseEditKind(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown edit kind " + j.at("kind").dump());
  edit.kind = *kind;
  edit.positions = j.at("positions").get<std::vector<size_t>>();
  edit.before = j.value("before", "");
  edit.after = j.value("after", "");
  edit.detail = j.value("detail", "");
  return edit;
}

json PerturbationToJson(const Perturbation& p) {
  json edits = json::array();
  for (const Edit& e : p.edits) edits.push_back(EditToJson(e));
  return {{"strategy", p.strategy ? json(StrategyName(*p.strategy)) : json(nullptr)},
          {"original_instruction", p.original_instruction},
          {"edits", edits}};
}

Perturbation PerturbationFromJson(const json& j) {
  Perturbation p;
  const json& strategy = j.at("strategy");
  if (!strategy.is_null()) {
    p.strategy = ParseStrategy(strategy.get<std::string>());
    if (!p.strategy) throw std::invalid_argument("unknown strategy " + strategy.dump());
  }
  p.original_instruction = j.at("original_instruction").get<std::string>();
  for (const json& e : j.at("edits")) p.edits.push_back(EditFromJson(e));
  return p;
}

json PerturbedSampleToJson(const PerturbedSample& sample) {
  json j = SampleToJson(sample.sample);
  j["perturbation"] = PerturbationToJson(sample.perturbation);
  return j;
}

PerturbedSample PerturbedSampleFromJson(const json& j, std::string_view source,
                                        std::string_view where) {
  PerturbedSample out;
  out.sample = SampleFromJson(j, source, where);
  try {
    out.perturbation = PerturbationFromJson(j.at("perturbation"));
  } catch (const std::exception& e) {
    throw MalformedRecord(std::string(source), std::string(where),
                          std::string("bad perturbation record: ") + e.what());
  }
  return out;
}

std::string MixtureToJsonl(const std::vector<PerturbedSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    out += PerturbedSampleToJson(s).dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<PerturbedSample> ParseMixtureJsonl(std::string_view contents,
                                               std::string_view source) {
  std::vector<PerturbedSample> out;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < contents.size()) {
    size_t eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) eol = contents.size();
    const std::string_view line = contents.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\r' || c == '\t'; })) {
      continue;
    }
    const std::string where = "line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw MalformedRecord(std::string(source), where, e.what());
    }
    out.push_back(PerturbedSampleFromJson(j, source, where));
  }
  return out;
}

json EvalItemToJson(const EvalItem& item) {
  const auto& s = item.perturbation.strategy;
  return {{"index", item.index},
          {"instruction", item.instruction},
          {"original_instruction", item.perturbation.original_instruction},
          {"strategy", s ? json(StrategyName(*s)) : json(nullptr)}};
}

std::string EvalSetToJsonl(const std::vector<EvalItem>& items) {
  std::string out;
  for (const auto& item : items) {
    out += EvalItemToJson(item).dump();
    out.push_back('\n');
  }
  return out;
}

json MixtureManifest::ToJson() const {
  return {{"spec", spec.ToJson()},
          {"counts",
           {{"total", total},
            {"perturbed", perturbed},
            {"kept", kept},
            {"per_strategy", per_strategy}}},
          {"checksums",
           {{"output_sha256", output_sha256},
            {"corpus_sha256", corpus_sha256},
            {"stop_words_sha256", stop_words_sha256}}},
          {"output_file", output_file},
          {"corpus_file", corpus_file},
          {"predictor", predictor}};
}

MixtureManifest MixtureManifest::FromJson(const json& j) {
  MixtureManifest m;
  m.spec = MixtureSpec::FromJson(j.at("spec"));
  const json& counts = j.at("counts");
  m.total = counts.at("total").get<size_t>();
  m.perturbed = counts.at("perturbed").get<size_t>();
  m.kept = counts.at("kept").get<size_t>();
  m.per_strategy = counts.at("per_strategy").get<std::map<std::string, size_t>>();
  const json& sums = j.at("checksums");
  m.output_sha256 = sums.at("output_sha256").get<std::string>();
  m.corpus_sha256 = sums.value("corpus_sha256", "");
  m.stop_words_sha256 = sums.value("stop_words_sha256", "");
  m.output_file = j.at("output_file").get<std::string>();
  m.corpus_file = j.value("corpus_file", "");
  m.predictor = j.value("predictor", "");
  return m;
}

}  // namespace noisy
