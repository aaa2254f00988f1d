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

#ifndef NOISY_RNG_H_
#define NOISY_RNG_H_

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace noisy {

// Every random decision in the pipeline flows through this generator.
// Outputs are bit-stable across platforms and thread counts. Algorithms and
// constants are documented in docs/determinism.md.

// SplitMix64 step (Steele, Lea, Flood 2014).
uint64_t SplitMix64(uint64_t& state);

// 64-bit FNV-1a.
uint64_t Fnv1a64(std::string_view bytes, uint64_t basis = 0xcbf29ce484222325ULL);

// Seed for the stream owned by one (global seed, sample id, purpose tag)
// triple: FNV-1a over seed(8 bytes LE) 0x1f id 0x1f tag, finalized by one
// SplitMix64 step.
uint64_t DeriveStreamSeed(uint64_t global_seed, std::string_view sample_id,
                          std::string_view tag);

// xoshiro256** seeded by four SplitMix64 outputs.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  static Rng ForStream(uint64_t global_seed, std::string_view sample_id,
                       std::string_view tag) {
    return Rng(DeriveStreamSeed(global_seed, sample_id, tag));
  }

  uint64_t Next();

  // Uniform integer in [0, bound) by modulo with rejection of the biased
  // low range. bound must be > 0.
  uint64_t Below(uint64_t bound);

  // Fisher-Yates, walking from the last element down.
  template <typename T>
  void Shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(Below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

  // k distinct indices from [0, n), by a partial Fisher-Yates over the
  // identity permutation. Returned in draw order. Requires k <= n.
  std::vector<size_t> SampleIndices(size_t n, size_t k);

 private:
  std::array<uint64_t, 4> s_;
};

// floor(x + 0.5), tolerant of representation error just below a half
// (0.35 * 10 rounds to 4).
size_t RoundHalfUp(double x);

}  // namespace noisy

#endif  // NOISY_RNG_H_
