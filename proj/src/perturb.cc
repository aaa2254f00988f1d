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

#include "noisy/perturb.h"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>

#include "noisy/errors.h"

namespace noisy {
namespace {

struct MaskSlot {
  std::string prefix;
  std::string suffix;
};

// Leading/trailing punctuation stays outside the mask: "form." is queried
// as "[MASK]." and comes back as "<prediction>.".
MaskSlot SplitForMask(std::string_view word) {
  const std::string_view core = StripPunctuation(word);
  if (core.empty()) return {};
  const size_t begin = static_cast<size_t>(core.data() - word.data());
  return {std::string(word.substr(0, begin)),
          std::string(word.substr(begin + core.size()))};
}

// Literal sentinels already present in the instruction would be counted as
// masks by the predictor.
std::string EscapeSentinel(std::string_view word) {
  std::string out(word);
  for (size_t pos = out.find(kMaskSentinel); pos != std::string::npos;
       pos = out.find(kMaskSentinel, pos)) {
    out.replace(pos, kMaskSentinel.size(), "[mask]");
  }
  return out;
}

MaskAnswer PredictChecked(MaskPredictor& predictor,
                          const std::vector<std::string>& query_words,
                          size_t expected) {
  MaskQuery query(Detokenize(query_words));
  MaskAnswer answer = predictor.Predict(query);
  if (answer.words.size() != expected) {
    throw PredictionCountMismatch(expected, answer.words.size());
  }
  ValidateAnswer(query, answer);
  return answer;
}

constexpr std::string_view kVowels = "aeiou";

char MatchCase(char letter, char like) {
  if (like >= 'A' && like <= 'Z' && letter >= 'a' && letter <= 'z') {
    return static_cast<char>(letter - 'a' + 'A');
  }
  return letter;
}

}  // namespace

std::string_view StrategyName(PerturbationStrategy strategy) {
  switch (strategy) {
    case PerturbationStrategy::kDeleteStopWords: return "delete_stop_words";
    case PerturbationStrategy::kShuffleWords: return "shuffle_words";
    case PerturbationStrategy::kDeleteWords: return "delete_words";
    case PerturbationStrategy::kReplaceWords: return "replace_words";
    case PerturbationStrategy::kInsertWords: return "insert_words";
    case PerturbationStrategy::kAddMisspelling: return "add_misspelling";
  }
  return "unknown";
}

std::optional<PerturbationStrategy> ParseStrategy(std::string_view name) {
  for (PerturbationStrategy s : kAllStrategies) {
    if (StrategyName(s) == name) return s;
  }
  return std::nullopt;
}

bool NeedsPredictor(PerturbationStrategy strategy) {
  return strategy == PerturbationStrategy::kReplaceWords ||
         strategy == PerturbationStrategy::kInsertWords;
}

std::string_view TypoKindName(TypoKind kind) {
  switch (kind) {
    case TypoKind::kDeleteLetter: return "delete_letter";
    case TypoKind::kTransposeLetters: return "transpose_letters";
    case TypoKind::kInsertVowel: return "insert_vowel";
    case TypoKind::kSubstituteLetter: return "substitute_letter";
  }
  return "unknown";
}

std::optional<TypoKind> ParseTypoKind(std::string_view name) {
  for (TypoKind k : kAllTypoKinds) {
    if (TypoKindName(k) == name) return k;
  }
  return std::nullopt;
}

size_t SelectionSize(size_t n, double ratio) {
  if (n == 0) return 0;
  return std::min(n, std::max<size_t>(1, RoundHalfUp(ratio * static_cast<double>(n))));
}

std::vector<size_t> SelectPositions(size_t n, double ratio, Rng& rng) {
  std::vector<size_t> picked = rng.SampleIndices(n, SelectionSize(n, ratio));
  std::sort(picked.begin(), picked.end());
  return picked;
}

PerturbResult DeleteStopWords(const TokenizedInstruction& tok,
                              const StopWordList& list) {
  PerturbResult result;
  // Walk backwards so each logged position is also the original index.
  for (size_t i = tok.words.size(); i-- > 0;) {
    if (IsStopWord(tok.words[i], list)) {
      result.edits.push_back({EditKind::kDelete, {i}, tok.words[i], "", ""});
    }
  }
  for (const std::string& word : tok.words) {
    if (!IsStopWord(word, list)) result.words.push_back(word);
  }
  return result;
}

PerturbResult ShuffleWords(const TokenizedInstruction& tok,
                           const PerturbConfig& cfg, Rng& rng) {
  const std::vector<std::string>& in = tok.words;
  PerturbResult result{in, {}};
  const size_t n = in.size();
  if (n < 2) return result;
  if (std::set<std::string_view>(in.begin(), in.end()).size() < 2) {
    return result;
  }
  const size_t k = std::min(n, std::max<size_t>(2, SelectionSize(n, cfg.ratio)));

  const auto all_same = [&](const std::vector<size_t>& slots) {
    return std::all_of(slots.begin(), slots.end(),
                       [&](size_t s) { return in[s] == in[slots[0]]; });
  };
  std::vector<size_t> slots;
  do {
    slots = rng.SampleIndices(n, k);
    std::sort(slots.begin(), slots.end());
  } while (all_same(slots));

  // order[i] = which selected word lands in slot i.
  std::vector<size_t> order(k);
  const auto unchanged = [&] {
    for (size_t i = 0; i < k; ++i) {
      if (in[slots[order[i]]] != in[slots[i]]) return false;
    }
    return true;
  };
  do {
    std::iota(order.begin(), order.end(), size_t{0});
    rng.Shuffle(std::span<size_t>(order));
  } while (unchanged());

  // Realize the permutation as a sequence of swaps for the log.
  std::vector<size_t> at(k);   // item currently in slot i
  std::vector<size_t> where(k);  // slot currently holding item j
  std::iota(at.begin(), at.end(), size_t{0});
  std::iota(where.begin(), where.end(), size_t{0});
  std::vector<std::string>& out = result.words;
  for (size_t i = 0; i < k; ++i) {
    const size_t j = where[order[i]];
    if (j == i) continue;
    result.edits.push_back(
        {EditKind::kMove, {slots[i], slots[j]}, out[slots[i]], out[slots[j]], ""});
    std::swap(out[slots[i]], out[slots[j]]);
    std::swap(at[i], at[j]);
    where[at[i]] = i;
    where[at[j]] = j;
  }
  return result;
}

PerturbResult DeleteWords(const TokenizedInstruction& tok,
                          const PerturbConfig& cfg, Rng& rng) {
  const size_t n = tok.words.size();
  PerturbResult result{tok.words, {}};
  if (n < 2) return result;
  const size_t k = std::min(SelectionSize(n, cfg.ratio), n - 1);
  std::vector<size_t> picked = rng.SampleIndices(n, k);
  std::sort(picked.rbegin(), picked.rend());
  for (size_t p : picked) {
    result.edits.push_back({EditKind::kDelete, {p}, result.words[p], "", ""});
    result.words.erase(result.words.begin() + static_cast<std::ptrdiff_t>(p));
  }
  return result;
}

PerturbResult ReplaceWords(const TokenizedInstruction& tok,
                           const PerturbConfig& cfg, MaskPredictor& predictor,
                           Rng& rng) {
  const size_t n = tok.words.size();
  PerturbResult result{tok.words, {}};
  if (n == 0) return result;
  const std::vector<size_t> picked = SelectPositions(n, cfg.ratio, rng);

  std::vector<MaskSlot> masks;
  std::vector<std::string> query;
  query.reserve(n);
  size_t next = 0;
  for (size_t i = 0; i < n; ++i) {
    if (next < picked.size() && picked[next] == i) {
      masks.push_back(SplitForMask(tok.words[i]));
      query.push_back(masks.back().prefix + std::string(kMaskSentinel) +
                      masks.back().suffix);
      ++next;
    } else {
      query.push_back(EscapeSentinel(tok.words[i]));
    }
  }
  const MaskAnswer answer = PredictChecked(predictor, query, picked.size());
  for (size_t m = 0; m < picked.size(); ++m) {
    const size_t p = picked[m];
    std::string filled = masks[m].prefix + answer.words[m] + masks[m].suffix;
    result.edits.push_back({EditKind::kReplace, {p}, result.words[p], filled, ""});
    result.words[p] = std::move(filled);
  }
  return result;
}

PerturbResult InsertWords(const TokenizedInstruction& tok,
                          const PerturbConfig& cfg, MaskPredictor& predictor,
                          Rng& rng) {
  const size_t n = tok.words.size();
  PerturbResult result{tok.words, {}};
  if (n < 2) return result;
  const size_t m = std::min(SelectionSize(n, cfg.ratio), n - 1);
  // Gap g sits between words g - 1 and g, g in [1, n - 1].
  std::vector<size_t> gaps = rng.SampleIndices(n - 1, m);
  for (size_t& g : gaps) ++g;
  std::sort(gaps.begin(), gaps.end());

  std::vector<std::string> query;
  query.reserve(n + m);
  size_t next = 0;
  for (size_t i = 0; i < n; ++i) {
    if (next < gaps.size() && gaps[next] == i) {
      query.emplace_back(kMaskSentinel);
      ++next;
    }
    query.push_back(EscapeSentinel(tok.words[i]));
  }
  const MaskAnswer answer = PredictChecked(predictor, query, m);
  for (size_t t = 0; t < m; ++t) {
    const size_t at = gaps[t] + t;
    result.edits.push_back({EditKind::kInsert, {at}, "", answer.words[t], ""});
    result.words.insert(result.words.begin() + static_cast<std::ptrdiff_t>(at),
                        answer.words[t]);
  }
  return result;
}


bool HasAsciiLetter(std::string_view word) {
  return std::any_of(word.begin(), word.end(), IsAsciiAlpha);
}

namespace {

std::vector<size_t> SwappablePairs(std::string_view word) {
  std::vector<size_t> out;  // i such that word[i], word[i+1] can swap
  for (size_t i = 0; i + 1 < word.size(); ++i) {
    if (IsAsciiAlpha(word[i]) && IsAsciiAlpha(word[i + 1]) &&
        word[i] != word[i + 1]) {
      out.push_back(i);
    }
  }
  return out;
}

// Kinds from `allowed` that apply to `word`, in canonical order.
std::vector<TypoKind> ApplicableKinds(std::string_view word,
                                      std::span<const TypoKind> allowed,
                                      bool has_swappable) {
  std::vector<TypoKind> kinds;
  if (!HasAsciiLetter(word)) return kinds;
  const auto on = [&](TypoKind k) {
    return std::find(allowed.begin(), allowed.end(), k) != allowed.end();
  };
  // Deleting the only character would leave an empty word.
  if (on(TypoKind::kDeleteLetter) && word.size() > 1) {
    kinds.push_back(TypoKind::kDeleteLetter);
  }
  if (on(TypoKind::kTransposeLetters) && has_swappable) {
    kinds.push_back(TypoKind::kTransposeLetters);
  }
  if (on(TypoKind::kInsertVowel)) kinds.push_back(TypoKind::kInsertVowel);
  if (on(TypoKind::kSubstituteLetter)) kinds.push_back(TypoKind::kSubstituteLetter);
  return kinds;
}

}  // namespace

bool CanMisspell(std::string_view word, std::span<const TypoKind> kinds) {
  return !ApplicableKinds(word, kinds, !SwappablePairs(word).empty()).empty();
}

Typo MisspellWord(std::string_view word, Rng& rng,
                  std::span<const TypoKind> allowed) {
  std::vector<size_t> letters;
  for (size_t i = 0; i < word.size(); ++i) {
    if (IsAsciiAlpha(word[i])) letters.push_back(i);
  }
  const std::vector<size_t> swappable = SwappablePairs(word);
  const std::vector<TypoKind> kinds =
      ApplicableKinds(word, allowed, !swappable.empty());
  if (kinds.empty()) {
    throw std::invalid_argument("MisspellWord: no applicable typo for \"" +
                                std::string(word) + "\"");
  }

  Typo typo{std::string(word), kinds[rng.Below(kinds.size())]};
  std::string& out = typo.word;
  switch (typo.kind) {
    case TypoKind::kDeleteLetter: {
      out.erase(letters[rng.Below(letters.size())], 1);
      break;
    }
    case TypoKind::kTransposeLetters: {
      const size_t i = swappable[rng.Below(swappable.size())];
      std::swap(out[i], out[i + 1]);
      break;
    }
    case TypoKind::kInsertVowel: {
      const size_t anchor = letters[rng.Below(letters.size())];
      const size_t at = anchor + rng.Below(2);  // before or after the letter
      const char vowel = MatchCase(kVowels[rng.Below(kVowels.size())], word[anchor]);
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(at), vowel);
      break;
    }
    case TypoKind::kSubstituteLetter: {
      const size_t at = letters[rng.Below(letters.size())];
      const bool upper = out[at] >= 'A' && out[at] <= 'Z';
      const char base = upper ? 'A' : 'a';
      // One of the 25 other letters of the same case.
      const int current = out[at] - base;
      int pick = static_cast<int>(rng.Below(25));
      if (pick >= current) ++pick;
      out[at] = static_cast<char>(base + pick);
      break;
    }
  }
  return typo;
}

PerturbResult AddMisspelling(const TokenizedInstruction& tok,
                             const PerturbConfig& cfg, Rng& rng) {
  const size_t n = tok.words.size();
  PerturbResult result{tok.words, {}};
  std::vector<size_t> eligible;
  for (size_t i = 0; i < n; ++i) {
    if (CanMisspell(tok.words[i], cfg.typo_kinds)) eligible.push_back(i);
  }
  if (eligible.empty()) return result;
  const size_t k = std::min(SelectionSize(n, cfg.ratio), eligible.size());
  std::vector<size_t> picked;
  for (size_t e : rng.SampleIndices(eligible.size(), k)) {
    picked.push_back(eligible[e]);
  }
  std::sort(picked.begin(), picked.end());
  for (size_t p : picked) {
    Typo typo = MisspellWord(result.words[p], rng, cfg.typo_kinds);
    result.edits.push_back({EditKind::kTypo, {p}, result.words[p], typo.word,
                            std::string(TypoKindName(typo.kind))});
    result.words[p] = std::move(typo.word);
  }
  return result;
}

PerturbedInstruction PerturbInstruction(PerturbationStrategy strategy,
                                        std::string_view instruction,
                                        const PerturbConfig& cfg,
                                        MaskPredictor* predictor, Rng& rng) {
  if (!(cfg.ratio > 0.0 && cfg.ratio <= 1.0)) {
    throw std::invalid_argument("perturbation ratio must be in (0, 1]");
  }
  if (cfg.typo_kinds.empty()) {
    throw std::invalid_argument("at least one typo kind is required");
  }
  const TokenizedInstruction tok = Tokenize(instruction);
  if (NeedsPredictor(strategy) && predictor == nullptr) {
    throw PredictorUnavailable("no predictor configured for " +
                               std::string(StrategyName(strategy)));
  }
  PerturbResult result;
  switch (strategy) {
    case PerturbationStrategy::kDeleteStopWords:
      result = DeleteStopWords(tok, *cfg.stop_words);
      break;
    case PerturbationStrategy::kShuffleWords:
      result = ShuffleWords(tok, cfg, rng);
      break;
    case PerturbationStrategy::kDeleteWords:
      result = DeleteWords(tok, cfg, rng);
      break;
    case PerturbationStrategy::kReplaceWords:
      result = ReplaceWords(tok, cfg, *predictor, rng);
      break;
    case PerturbationStrategy::kInsertWords:
      result = InsertWords(tok, cfg, *predictor, rng);
      break;
    case PerturbationStrategy::kAddMisspelling:
      result = AddMisspelling(tok, cfg, rng);
      break;
  }
  PerturbedInstruction out;
  out.instruction = Detokenize(result.words);
  out.perturbation.strategy = strategy;
  out.perturbation.original_instruction = std::string(instruction);
  out.perturbation.edits = std::move(result.edits);
  return out;
}

PerturbedSample Apply(PerturbationStrategy strategy,
                      const InstructionSample& sample, const PerturbConfig& cfg,
                      MaskPredictor* predictor, Rng& rng) {
  PerturbedInstruction perturbed =
      PerturbInstruction(strategy, sample.instruction, cfg, predictor, rng);
  PerturbedSample out{sample, std::move(perturbed.perturbation)};
  out.sample.instruction = std::move(perturbed.instruction);
  return out;
}

PerturbedSample Keep(const InstructionSample& sample) {
  return {sample, {std::nullopt, sample.instruction, {}}};
}

}  // namespace noisy
