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

#ifndef NOISY_TEXTSEG_H_
#define NOISY_TEXTSEG_H_

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace noisy {

// An instruction split into words. A word is a maximal run of non-whitespace
// bytes and keeps any punctuation attached to it ("shorter," is one word).
struct TokenizedInstruction {
  std::vector<std::string> words;
  std::string raw;

  bool operator==(const TokenizedInstruction&) const = default;
};

TokenizedInstruction Tokenize(std::string_view raw);

// Joins words with single spaces.
std::string Detokenize(const std::vector<std::string>& words);
inline std::string Detokenize(const TokenizedInstruction& tok) {
  return Detokenize(tok.words);
}

// Collapses whitespace runs to one space and trims both ends. Equal to
// Detokenize(Tokenize(text)).
std::string NormalizeWhitespace(std::string_view text);

// ASCII whitespace as understood by the tokenizer: space, \t, \n, \v, \f, \r.
bool IsSpace(char c);
bool IsAsciiAlpha(char c);
bool IsAsciiPunct(char c);

// The word with leading and trailing ASCII punctuation removed.
std::string_view StripPunctuation(std::string_view word);

std::string AsciiLower(std::string_view text);

// A fixed set of lowercase stop words plus the SHA-256 of the list file it
// was read from.
class StopWordList {
 public:
  // The English list shipped in data/stopwords_en.txt and compiled into the
  // library.
  static const StopWordList& Shipped();

  // Parses the list file format: one lowercase word per line, LF terminated.
  // Throws MalformedRecord on entries that are empty, uppercase or contain
  // whitespace.
  static StopWordList Parse(std::string_view contents,
                            std::string_view source = "<memory>");
  static StopWordList Load(const std::filesystem::path& path);

  bool Contains(std::string_view lowercase_word) const;
  size_t size() const { return entries_.size(); }
  const std::set<std::string, std::less<>>& entries() const { return entries_; }
  const std::string& checksum() const { return checksum_; }

 private:
  std::set<std::string, std::less<>> entries_;
  std::string checksum_;
};

// SHA-256 of data/stopwords_en.txt.
inline constexpr std::string_view kShippedStopWordsSha256 =
    "b3f772a000465cb76e23adb03b47073c591c156fad8f7af09c8b8e80d6bd8eac";

// True iff the word, lowercased and stripped of leading/trailing
// punctuation, is in the list.
bool IsStopWord(std::string_view word, const StopWordList& list);

}  // namespace noisy

#endif  // NOISY_TEXTSEG_H_
