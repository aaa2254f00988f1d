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

#ifndef NOISY_SAMPLE_H_
#define NOISY_SAMPLE_H_

#include <optional>
#include <string>
#include <string_view>

namespace noisy {

enum class Dataset { kGpt4Alpaca, kSuperNatural, kDolly };

inline constexpr Dataset kAllDatasets[] = {Dataset::kGpt4Alpaca,
                                           Dataset::kSuperNatural,
                                           Dataset::kDolly};

// "gpt4-alpaca", "supernatural", "dolly".
std::string_view DatasetTag(Dataset dataset);
std::optional<Dataset> ParseDatasetTag(std::string_view tag);

// One instruction-tuning example. Only `instruction` is ever perturbed.
struct InstructionSample {
  std::string id;
  Dataset dataset = Dataset::kGpt4Alpaca;
  std::string instruction;
  std::optional<std::string> context;
  std::string response;

  bool operator==(const InstructionSample&) const = default;
};

}  // namespace noisy

#endif  // NOISY_SAMPLE_H_
