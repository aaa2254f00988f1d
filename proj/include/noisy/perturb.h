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

#ifndef NOISY_PERTURB_H_
#define NOISY_PERTURB_H_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "noisy/predictor.h"
#include "noisy/rng.h"
#include "noisy/sample.h"
#include "noisy/textseg.h"

namespace noisy {

enum class PerturbationStrategy {
  kDeleteStopWords,
  kShuffleWords,
  kDeleteWords,
  kReplaceWords,
  kInsertWords,
  kAddMisspelling,
};

inline constexpr std::array<PerturbationStrategy, 6> kAllStrategies = {
    PerturbationStrategy::kDeleteStopWords, PerturbationStrategy::kShuffleWords,
    PerturbationStrategy::kDeleteWords,     PerturbationStrategy::kReplaceWords,
    PerturbationStrategy::kInsertWords,     PerturbationStrategy::kAddMisspelling,
};

// Snake-case tag used in files, flags and stream derivation:
// "delete_stop_words", "shuffle_words", "delete_words", "replace_words",
// "insert_words", "add_misspelling".
std::string_view StrategyName(PerturbationStrategy strategy);
std::optional<PerturbationStrategy> ParseStrategy(std::string_view name);
bool NeedsPredictor(PerturbationStrategy strategy);

enum class TypoKind { kDeleteLetter, kTransposeLetters, kInsertVowel,
                      kSubstituteLetter };

inline constexpr std::array<TypoKind, 4> kAllTypoKinds = {
    TypoKind::kDeleteLetter, TypoKind::kTransposeLetters,
    TypoKind::kInsertVowel, TypoKind::kSubstituteLetter};

// Kinds used unless configured otherwise. Each is a single-character
// insertion, deletion or substitution (Levenshtein distance 1).
inline constexpr std::array<TypoKind, 3> kDefaultTypoKinds = {
    TypoKind::kDeleteLetter, TypoKind::kInsertVowel,
    TypoKind::kSubstituteLetter};

std::string_view TypoKindName(TypoKind kind);
std::optional<TypoKind> ParseTypoKind(std::string_view name);

struct PerturbConfig {
  // Fraction of an instruction's words a strategy touches. (0, 1].
  double ratio = 0.25;
  const StopWordList* stop_words = &StopWordList::Shipped();
  // Typo kinds add_misspelling may draw from. Nonempty.
  std::vector<TypoKind> typo_kinds{kDefaultTypoKinds.begin(),
                                   kDefaultTypoKinds.end()};
};

// ---------------------------------------------------------------------------
// Edit log

enum class EditKind { kDelete, kMove, kReplace, kInsert, kTypo };

std::string_view EditKindName(EditKind kind);
std::optional<EditKind> ParseEditKind(std::string_view name);

// One atomic edit, applied to the word list as it stands after the previous
// edits of the same log:
//   delete  positions={p}     removes word p (== before)
//   move    positions={i, j}  swaps words i (== before) and j (== after)
//   replace positions={p}     word p: before -> after
//   typo    positions={p}     word p: before -> after, detail = typo kind
//   insert  positions={p}     inserts `after` so that it lands at index p
struct Edit {
  EditKind kind = EditKind::kReplace;
  std::vector<size_t> positions;
  std::string before;
  std::string after;
  std::string detail;

  bool operator==(const Edit&) const = default;
};

using EditLog = std::vector<Edit>;

struct ReplayResult {
  bool ok = false;
  std::vector<std::string> words;
  std::string error;  // first edit that failed to apply, when !ok
};

ReplayResult ReplayEdits(std::vector<std::string> words, const EditLog& log);

// ---------------------------------------------------------------------------
// Strategies

struct PerturbResult {
  std::vector<std::string> words;
  EditLog edits;
};

// max(1, round_half_up(ratio * n)) capped at n; 0 when n == 0.
size_t SelectionSize(size_t n, double ratio);

// SelectionSize(n, ratio) distinct indices drawn uniformly from [0, n),
// returned in ascending order.
std::vector<size_t> SelectPositions(size_t n, double ratio, Rng& rng);

PerturbResult DeleteStopWords(const TokenizedInstruction& tok,
                              const StopWordList& list);

// Rearranges max(2, k) selected words among their own slots. The new order is
// drawn uniformly from the permutations that change the visible word
// sequence; unselected words never move. No-op with fewer than two distinct
// words.
PerturbResult ShuffleWords(const TokenizedInstruction& tok,
                           const PerturbConfig& cfg, Rng& rng);

// Removes k words, k capped at n - 1.
PerturbResult DeleteWords(const TokenizedInstruction& tok,
                          const PerturbConfig& cfg, Rng& rng);

// Masks k words (leading/trailing punctuation stays outside the mask) and
// fills all masks with one predictor call.
PerturbResult ReplaceWords(const TokenizedInstruction& tok,
                           const PerturbConfig& cfg, MaskPredictor& predictor,
                           Rng& rng);

// Puts a mask into min(k, n - 1) distinct gaps between consecutive words and
// fills all of them with one predictor call.
PerturbResult InsertWords(const TokenizedInstruction& tok,
                          const PerturbConfig& cfg, MaskPredictor& predictor,
                          Rng& rng);

struct Typo {
  std::string word;
  TypoKind kind;
};

// Applies exactly one character edit, drawn from `kinds`, to an ASCII letter
// of `word`. Punctuation, digits and non-ASCII bytes are never touched and
// the result always differs from the input. Throws std::invalid_argument
// unless CanMisspell(word, kinds).
Typo MisspellWord(std::string_view word, Rng& rng,
                  std::span<const TypoKind> kinds = kDefaultTypoKinds);

bool HasAsciiLetter(std::string_view word);

// True when at least one of `kinds` applies to `word`.
bool CanMisspell(std::string_view word,
                 std::span<const TypoKind> kinds = kDefaultTypoKinds);

// Misspells k words chosen among those CanMisspell accepts.
PerturbResult AddMisspelling(const TokenizedInstruction& tok,
                             const PerturbConfig& cfg, Rng& rng);

// ---------------------------------------------------------------------------
// Dispatch

struct Perturbation {
  std::optional<PerturbationStrategy> strategy;
  std::string original_instruction;
  EditLog edits;

  bool operator==(const Perturbation&) const = default;
};

struct PerturbedInstruction {
  std::string instruction;
  Perturbation perturbation;
};

// `predictor` may be null for strategies that do not need one; a null
// predictor for replace/insert raises PredictorUnavailable.
PerturbedInstruction PerturbInstruction(PerturbationStrategy strategy,
                                        std::string_view instruction,
                                        const PerturbConfig& cfg,
                                        MaskPredictor* predictor, Rng& rng);

struct PerturbedSample {
  InstructionSample sample;  // instruction holds the perturbed text
  Perturbation perturbation;

  bool operator==(const PerturbedSample&) const = default;
};

// Perturbs the instruction of `sample`; context and response are copied
// through untouched.
PerturbedSample Apply(PerturbationStrategy strategy,
                      const InstructionSample& sample, const PerturbConfig& cfg,
                      MaskPredictor* predictor, Rng& rng);

// A sample that is kept as is.
PerturbedSample Keep(const InstructionSample& sample);

// The random stream used for (sample, strategy) under a global seed.
inline Rng StrategyStream(uint64_t global_seed, std::string_view sample_id,
                          PerturbationStrategy strategy) {
  return Rng::ForStream(global_seed, sample_id, StrategyName(strategy));
}

}  // namespace noisy

#endif  // NOISY_PERTURB_H_
