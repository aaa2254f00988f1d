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

#include <string>
#include <utility>

#include "noisy/perturb.h"

namespace noisy {

std::string_view EditKindName(EditKind kind) {
  switch (kind) {
    case EditKind::kDelete: return "delete";
    case EditKind::kMove: return "move";
    case EditKind::kReplace: return "replace";
    case EditKind::kInsert: return "insert";
    case EditKind::kTypo: return "typo";
  }
  return "unknown";
}

std::optional<EditKind> ParseEditKind(std::string_view name) {
  for (EditKind kind : {EditKind::kDelete, EditKind::kMove, EditKind::kReplace,
                        EditKind::kInsert, EditKind::kTypo}) {
    if (EditKindName(kind) == name) return kind;
  }
  return std::nullopt;
}

ReplayResult ReplayEdits(std::vector<std::string> words, const EditLog& log) {
  ReplayResult result;
  for (size_t e = 0; e < log.size(); ++e) {
    const Edit& edit = log[e];
    const auto fail = [&](const std::string& why) {
      result.error = "edit " + std::to_string(e) + " (" +
                     std::string(EditKindName(edit.kind)) + "): " + why;
      return result;
    };
    const size_t arity = edit.kind == EditKind::kMove ? 2 : 1;
    if (edit.positions.size() != arity) return fail("wrong position count");
    const size_t p = edit.positions[0];
    switch (edit.kind) {
      case EditKind::kDelete:
        if (p >= words.size()) return fail("position out of range");
        if (words[p] != edit.before) return fail("word mismatch at " + std::to_string(p));
        words.erase(words.begin() + static_cast<std::ptrdiff_t>(p));
        break;
      case EditKind::kMove: {
        const size_t q = edit.positions[1];
        if (p >= words.size() || q >= words.size() || p == q) {
          return fail("bad move positions");
        }
        if (words[p] != edit.before || words[q] != edit.after) {
          return fail("word mismatch at " + std::to_string(p) + "/" + std::to_string(q));
        }
        std::swap(words[p], words[q]);
        break;
      }
      case EditKind::kReplace:
      case EditKind::kTypo:
        if (p >= words.size()) return fail("position out of range");
        if (words[p] != edit.before) return fail("word mismatch at " + std::to_string(p));
        if (edit.after.empty()) return fail("empty replacement");
        words[p] = edit.after;
        break;
      case EditKind::kInsert:
        if (p > words.size()) return fail("position out of range");
        if (edit.after.empty()) return fail("empty insertion");
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(p), edit.after);
        break;
    }
  }
  result.ok = true;
  result.words = std::move(words);
  return result;
}

}  // namespace noisy
