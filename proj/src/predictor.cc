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

#include "noisy/predictor.h"

#include <stdexcept>

#include "noisy/digest.h"
#include "noisy/errors.h"
#include "noisy/rng.h"
#include "noisy/textseg.h"

namespace noisy {

namespace resources {
extern const std::string_view kFillVocabEn;
}  // namespace resources

size_t CountMasks(std::string_view text) {
  size_t count = 0;
  for (size_t pos = text.find(kMaskSentinel); pos != std::string_view::npos;
       pos = text.find(kMaskSentinel, pos + kMaskSentinel.size())) {
    ++count;
  }
  return count;
}

MaskQuery::MaskQuery(std::string text)
    : text_(std::move(text)), mask_count_(CountMasks(text_)) {
  if (mask_count_ == 0) {
    throw std::invalid_argument("mask query without a [MASK] sentinel");
  }
}

void ValidateAnswer(const MaskQuery& query, const MaskAnswer& answer) {
  if (answer.words.size() != query.mask_count()) {
    throw MalformedResponse("expected " + std::to_string(query.mask_count()) +
                            " words, got " +
                            std::to_string(answer.words.size()));
  }
  for (const std::string& word : answer.words) {
    if (word.empty()) throw MalformedResponse("empty predicted word");
    for (char c : word) {
      if (IsSpace(c)) {
        throw MalformedResponse("predicted word contains whitespace: \"" +
                                word + "\"");
      }
    }
    if (CountMasks(word) != 0) {
      throw MalformedResponse("predicted word contains the mask sentinel");
    }
  }
}

OfflinePredictor::OfflinePredictor(uint64_t seed) : seed_(seed) {}

const std::vector<std::string>& OfflinePredictor::Vocabulary() {
  static const std::vector<std::string> vocab =
      Tokenize(resources::kFillVocabEn).words;
  return vocab;
}

const std::string& OfflinePredictor::VocabularyChecksum() {
  static const std::string sum = Sha256Hex(resources::kFillVocabEn);
  return sum;
}

MaskAnswer OfflinePredictor::Predict(const MaskQuery& query) {
  const std::vector<std::string>& vocab = Vocabulary();
  MaskAnswer answer;
  answer.model = "offline-vocab-" + std::to_string(vocab.size());
  answer.words.reserve(query.mask_count());
  for (size_t i = 0; i < query.mask_count(); ++i) {
    const uint64_t h =
        DeriveStreamSeed(seed_, query.text(), "mask:" + std::to_string(i));
    answer.words.push_back(vocab[h % vocab.size()]);
  }
  return answer;
}

HealthStatus OfflinePredictor::HealthCheck() {
  return {true, "offline:" + VocabularyChecksum().substr(0, 12), ""};
}

}  // namespace noisy
