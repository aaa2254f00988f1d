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

#include "noisy/textseg.h"

#include "noisy/digest.h"
#include "noisy/errors.h"

namespace noisy {

namespace resources {
extern const std::string_view kStopWordsEn;
}  // namespace resources

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' ||
         c == '\r';
}

bool IsAsciiAlpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool IsAsciiPunct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
         (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

std::string AsciiLower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view StripPunctuation(std::string_view word) {
  size_t begin = 0;
  size_t end = word.size();
  while (begin < end && IsAsciiPunct(word[begin])) ++begin;
  while (end > begin && IsAsciiPunct(word[end - 1])) --end;
  return word.substr(begin, end - begin);
}

TokenizedInstruction Tokenize(std::string_view raw) {
  TokenizedInstruction tok;
  tok.raw = std::string(raw);
  size_t i = 0;
  while (i < raw.size()) {
    while (i < raw.size() && IsSpace(raw[i])) ++i;
    const size_t start = i;
    while (i < raw.size() && !IsSpace(raw[i])) ++i;
    if (i > start) tok.words.emplace_back(raw.substr(start, i - start));
  }
  return tok;
}

std::string Detokenize(const std::vector<std::string>& words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::string NormalizeWhitespace(std::string_view text) {
  return Detokenize(Tokenize(text).words);
}

StopWordList StopWordList::Parse(std::string_view contents,
                                 std::string_view source) {
  StopWordList list;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < contents.size()) {
    size_t eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) eol = contents.size();
    std::string_view line = contents.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    const auto bad = [&](const std::string& why) {
      return MalformedRecord(std::string(source), std::to_string(line_no), why);
    };
    if (line.empty()) throw bad("empty stop word");
    for (char c : line) {
      if (IsSpace(c)) throw bad("stop word contains whitespace");
      if (c >= 'A' && c <= 'Z') throw bad("stop word is not lowercase");
    }
    list.entries_.emplace(line);
  }
  if (list.entries_.empty()) {
    throw MalformedRecord(std::string(source), "0", "empty stop-word list");
  }
  list.checksum_ = Sha256Hex(contents);
  return list;
}

StopWordList StopWordList::Load(const std::filesystem::path& path) {
  return Parse(ReadFile(path), path.string());
}

const StopWordList& StopWordList::Shipped() {
  static const StopWordList list =
      Parse(resources::kStopWordsEn, "data/stopwords_en.txt");
  return list;
}

bool StopWordList::Contains(std::string_view lowercase_word) const {
  return entries_.find(lowercase_word) != entries_.end();
}

bool IsStopWord(std::string_view word, const StopWordList& list) {
  const std::string_view core = StripPunctuation(word);
  if (core.empty()) return false;
  return list.Contains(AsciiLower(core));
}

}  // namespace noisy
