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

#ifndef NOISY_PREDICTOR_H_
#define NOISY_PREDICTOR_H_

#include <chrono>
#include <cstdint>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

namespace noisy {

inline constexpr std::string_view kMaskSentinel = "[MASK]";

size_t CountMasks(std::string_view text);

// Text with one or more "[MASK]" sentinels to be filled in a single pass.
class MaskQuery {
 public:
  // Throws std::invalid_argument when the text holds no sentinel.
  explicit MaskQuery(std::string text);

  const std::string& text() const { return text_; }
  size_t mask_count() const { return mask_count_; }

 private:
  std::string text_;
  size_t mask_count_;
};

// One predicted word per sentinel, in reading order.
struct MaskAnswer {
  std::vector<std::string> words;
  std::string model;
};

// Throws MalformedResponse unless the answer has one nonempty,
// whitespace-free, sentinel-free word per mask.
void ValidateAnswer(const MaskQuery& query, const MaskAnswer& answer);

struct HealthStatus {
  bool reachable = false;
  std::string backend;  // backend identity, e.g. "offline:<vocab sha>" or the
                        // model id echoed by a remote server
  std::string cause;    // why it is unreachable
};

class MaskPredictor {
 public:
  virtual ~MaskPredictor() = default;

  // Fills every mask of `query` in one call. Throws PredictorUnavailable or
  // MalformedResponse. Implementations must be safe to call concurrently.
  virtual MaskAnswer Predict(const MaskQuery& query) = 0;

  virtual HealthStatus HealthCheck() = 0;

  // Short identity recorded in manifests ("offline" or "remote").
  virtual std::string Kind() const = 0;
};

// Model-free predictor: each mask is filled with an entry of a fixed
// 1,000-word frequency list (data/fill_vocab_en.txt), picked by hashing the
// seed, the query text and the mask index. Pure and stateless.
class OfflinePredictor : public MaskPredictor {
 public:
  explicit OfflinePredictor(uint64_t seed);

  MaskAnswer Predict(const MaskQuery& query) override;
  HealthStatus HealthCheck() override;
  std::string Kind() const override { return "offline"; }

  static const std::vector<std::string>& Vocabulary();
  static const std::string& VocabularyChecksum();

 private:
  uint64_t seed_;
};

struct RemotePredictorOptions {
  std::string base_url;  // e.g. "http://127.0.0.1:8080"
  std::chrono::milliseconds timeout{10000};
  int max_in_flight = 8;
};

// Client for a masked-LM fill service:
//   POST <base_url>/fill-mask  {"text": "..."}
//   200 -> {"words": ["w1", ...], "model": "<id>"}
// Non-200 or transport failure raises PredictorUnavailable; a body that does
// not fit the schema or the mask count raises MalformedResponse.
class RemotePredictor : public MaskPredictor {
 public:
  explicit RemotePredictor(RemotePredictorOptions options);

  MaskAnswer Predict(const MaskQuery& query) override;
  // Probes the fill endpoint with a one-mask query.
  HealthStatus HealthCheck() override;
  std::string Kind() const override { return "remote"; }

 private:
  RemotePredictorOptions options_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::counting_semaphore<> in_flight_;
};

}  // namespace noisy

#endif  // NOISY_PREDICTOR_H_
