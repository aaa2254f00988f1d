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

#ifndef NOISY_INGEST_H_
#define NOISY_INGEST_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "noisy/sample.h"

namespace noisy {

// Offset of the first byte that is not part of a well-formed UTF-8 sequence
// (overlongs, surrogates and code points above U+10FFFF are rejected), or
// nullopt for valid input.
std::optional<size_t> FindInvalidUtf8(std::string_view bytes);

// Alpaca-style JSON array of {"instruction", "input", "output"} objects.
// Empty "input" leaves the context unset. Ids are "gpt4-alpaca:<ordinal>".
std::vector<InstructionSample> ParseAlpaca(std::string_view contents,
                                           std::string_view source);
std::vector<InstructionSample> ParseAlpacaFile(const std::filesystem::path& path);

// Dolly-style JSONL of {"instruction", "context", "response", "category"}.
// Blank lines are skipped; errors carry the 1-based line number.
std::vector<InstructionSample> ParseDolly(std::string_view contents,
                                          std::string_view source);
std::vector<InstructionSample> ParseDollyFile(const std::filesystem::path& path);

struct SupernaturalOptions {
  // Keep at most this many instances per task, drawn uniformly with a stream
  // derived from (seed, task name). Kept instances stay in file order.
  std::optional<size_t> per_task_cap;
  uint64_t seed = 0;
};

// One Super-NaturalInstructions task object: "Definition" (string or list of
// strings) and "Instances" ([{"id", "input", "output"}]). The definition is
// the instruction, the instance input the context and the first output the
// response. `task_name` names samples when instances carry no native id.
std::vector<InstructionSample> ParseSupernaturalTask(
    std::string_view contents, std::string_view task_name,
    const SupernaturalOptions& options = {});

// A task file or a directory of task files (*.json, visited in name order).
std::vector<InstructionSample> ParseSupernatural(
    const std::filesystem::path& path, const SupernaturalOptions& options = {});

// Ordinal-based id: "<dataset>:<6-digit zero-padded ordinal>".
std::string MakeSampleId(Dataset dataset, size_t ordinal);

struct CorpusManifest {
  std::map<std::string, size_t> counts;        // dataset tag -> samples
  size_t total = 0;
  std::map<std::string, std::string> sources;  // source path -> sha256

  nlohmann::json ToJson() const;
  static CorpusManifest FromJson(const nlohmann::json& j);
};

struct Corpus {
  std::vector<InstructionSample> samples;
  CorpusManifest manifest;
};

// Concatenates in argument order. Throws DuplicateId.
Corpus Combine(std::vector<std::vector<InstructionSample>> datasets);

nlohmann::json SampleToJson(const InstructionSample& sample);
// Throws MalformedRecord (location = `where`).
InstructionSample SampleFromJson(const nlohmann::json& j, std::string_view source,
                                 std::string_view where);

// The unified corpus file: one SampleToJson object per line.
std::string CorpusToJsonl(const std::vector<InstructionSample>& samples);
std::vector<InstructionSample> ParseCorpusJsonl(std::string_view contents,
                                                std::string_view source);
std::vector<InstructionSample> ReadCorpusFile(const std::filesystem::path& path);

}  // namespace noisy

#endif  // NOISY_INGEST_H_
