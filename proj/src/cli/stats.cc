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

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

#include "noisy/cli.h"
#include "noisy/digest.h"

namespace noisy::cli {

using nlohmann::json;

size_t OsaDistance(std::string_view a, std::string_view b) {
  const size_t n = a.size();
  const size_t m = b.size();
  std::vector<std::vector<size_t>> d(n + 1, std::vector<size_t>(m + 1));
  for (size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
      }
    }
  }
  return d[n][m];
}

namespace {

// Word-count change a strategy must produce on an n-word instruction, or
// nullopt when only an upper bound of zero applies (stop-word deletion).
std::optional<long> ExpectedDelta(PerturbationStrategy s, size_t n, double ratio) {
  const long capped = n < 2 ? 0 : static_cast<long>(std::min(SelectionSize(n, ratio), n - 1));
  switch (s) {
    case PerturbationStrategy::kDeleteWords: return -capped;
    case PerturbationStrategy::kInsertWords: return capped;
    case PerturbationStrategy::kDeleteStopWords: return std::nullopt;
    default: return 0;
  }
}

}  // namespace

StatsReport CmdStats(const std::filesystem::path& mixture, std::optional<double> ratio) {
  const std::string bytes = ReadFile(mixture);
  const std::vector<PerturbedSample> records = ParseMixtureJsonl(bytes, mixture.string());

  StatsReport report;
  report.sha256 = Sha256Hex(bytes);
  report.ratio = 0.25;
  if (ratio) {
    report.ratio = *ratio;
  } else if (const auto manifest = ManifestPathFor(mixture); std::filesystem::exists(manifest)) {
    try {
      report.ratio = MixtureManifest::FromJson(json::parse(ReadFile(manifest))).spec.ratio;
    } catch (const std::exception&) {
      // An unreadable manifest only costs us the recorded ratio.
    }
  }

  std::map<std::string, long> delta_sum;
  report.total = records.size();
  for (const auto& r : records) {
    const auto& strategy = r.perturbation.strategy;
    if (!strategy) continue;
    ++report.perturbed;
    const std::string name(StrategyName(*strategy));
    const size_t n = Tokenize(r.perturbation.original_instruction).words.size();
    const long delta = static_cast<long>(Tokenize(r.sample.instruction).words.size()) -
                       static_cast<long>(n);
    StrategyStats& st = report.per_strategy[name];
    if (st.count == 0) {
      st.delta_min = delta;
      st.delta_max = delta;
    }
    ++st.count;
    st.delta_min = std::min(st.delta_min, delta);
    st.delta_max = std::max(st.delta_max, delta);
    delta_sum[name] += delta;
    const auto expected = ExpectedDelta(*strategy, n, report.ratio);
    if (expected ? delta != *expected : delta > 0) ++st.count_law_violations;

    for (const Edit& e : r.perturbation.edits) {
      if (e.kind != EditKind::kTypo) continue;
      ++report.misspelling_distance_histogram[OsaDistance(e.before, e.after)];
      ++report.typo_kinds[e.detail.empty() ? "unknown" : e.detail];
    }
  }
  report.kept = report.total - report.perturbed;
  report.achieved_proportion =
      report.total == 0 ? 0.0 : static_cast<double>(report.perturbed) / report.total;
  for (auto& [name, st] : report.per_strategy) {
    st.delta_mean = static_cast<double>(delta_sum[name]) / static_cast<double>(st.count);
  }
  return report;
}

json StatsReport::ToJson() const {
  json strategies = json::object();
  for (const auto& [name, st] : per_strategy) {
    strategies[name] = {{"count", st.count},
                        {"word_delta", {{"mean", st.delta_mean}, {"min", st.delta_min}, {"max", st.delta_max}}},
                        {"count_law_violations", st.count_law_violations}};
  }
  json histogram = json::object();
  for (const auto& [d, c] : misspelling_distance_histogram) histogram[std::to_string(d)] = c;
  return {{"total", total},
          {"perturbed", perturbed},
          {"kept", kept},
          {"achieved_proportion", achieved_proportion},
          {"ratio", ratio},
          {"per_strategy", strategies},
          {"misspelling_edit_distance", histogram},
          {"typo_kinds", typo_kinds},
          {"sha256", sha256}};
}

std::string StatsReport::ToText() const {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "samples    %zu (perturbed %zu, kept %zu, proportion %.4f)\n",
                total, perturbed, kept, achieved_proportion);
  out << buf;
  out << "sha256     " << sha256 << "\n\n";
  out << "strategy             count   delta mean    min    max  law violations\n";
  for (const auto& [name, st] : per_strategy) {
    std::snprintf(buf, sizeof(buf), "%-18s %7zu %12.3f %6ld %6ld %15zu\n", name.c_str(),
                  st.count, st.delta_mean, st.delta_min, st.delta_max,
                  st.count_law_violations);
    out << buf;
  }
  if (!misspelling_distance_histogram.empty()) {
    out << "\nmisspelling edit distance:";
    for (const auto& [d, c] : misspelling_distance_histogram) out << " " << d << "=" << c;
    out << "\ntypo kinds:";
    for (const auto& [k, c] : typo_kinds) out << " " << k << "=" << c;
    out << "\n";
  }
  return out.str();
}

}  // namespace noisy::cli
