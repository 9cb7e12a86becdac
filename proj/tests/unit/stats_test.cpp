// Copyright (c) 2026 The UTS Pipeline Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <map>

#include "support.hpp"
#include "uts/rng.hpp"
#include "uts/stats.hpp"

using namespace uts;
using testutil::near;

namespace {

Vocabulary vocab_of(const std::vector<std::string>& tags) {
  // Strictly descending synthetic scores keep the requested tag order.
  std::vector<VocabEntry> entries;
  const std::int64_t n = static_cast<std::int64_t>(tags.size()) + 1;
  for (std::size_t i = 0; i < tags.size(); ++i)
    entries.push_back({tags[i], 1, static_cast<double>(tags.size() - i)});
  return Vocabulary::from_entries(std::move(entries), n);
}

}  // namespace

TEST_SUITE_BEGIN("stats");

TEST_CASE("rows sort by count desc then tag asc with contiguous ranks") {
  DfTable table;
  table.n_records = 3;
  table.counts = {{"a", 3}, {"c", 1}, {"b", 1}};
  const FrequencyReport r = frequency_report(table, {2, 2, 1});
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].tag == "a");
  CHECK(r.rows[0].rank == 1);
  CHECK(r.rows[1].tag == "b");  // ties break lexicographically
  CHECK(r.rows[1].rank == 2);
  CHECK(r.rows[2].tag == "c");
  CHECK(r.rows[2].rank == 3);
}

TEST_CASE("single tag gets rank one") {
  DfTable table;
  table.n_records = 1;
  table.counts = {{"solo", 1}};
  const FrequencyReport r = frequency_report(table, {1});
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].rank == 1);
  CHECK(r.rows[0].count == 1);
  CHECK(r.mean_tags_per_record == 1.0);
  CHECK(r.median_tags_per_record == 1.0);
}

TEST_CASE("counts from random tag lists match an independent recount") {
  Rng rng(17);
  std::vector<TagList> lists;
  std::vector<int> per_record;
  std::map<std::string, std::int64_t> recount;
  for (int i = 0; i < 100; ++i) {
    std::vector<std::string> tags;
    const int n = rng.uniform_int(1, 8);
    for (int j = 0; j < n; ++j) tags.push_back("t" + std::to_string(rng.uniform_int(0, 19)));
    std::sort(tags.begin(), tags.end());
    tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
    for (const std::string& t : tags) ++recount[t];
    per_record.push_back(static_cast<int>(tags.size()));
    lists.push_back(TagList::from_validated(tags));
  }
  const DfTable table = accumulate_df(lists);
  const FrequencyReport r = frequency_report(table, per_record);
  CHECK(r.pool_size == static_cast<std::int64_t>(recount.size()));
  std::int64_t row_total = 0;
  for (const FrequencyRow& row : r.rows) {
    CHECK(recount.at(row.tag) == row.count);
    row_total += row.count;
  }
  CHECK(row_total == r.total_tag_instances);
}

TEST_CASE("inconsistent per-record counts are rejected") {
  DfTable table;
  table.n_records = 2;
  table.counts = {{"a", 2}};
  CHECK_THROWS_AS(frequency_report(table, {1, 2}), std::invalid_argument);  // sums to 3, not 2
  CHECK_THROWS_AS(frequency_report(table, {2}), std::invalid_argument);     // wrong length
}

TEST_CASE("median handles even and odd record counts") {
  DfTable table;
  table.n_records = 4;
  table.counts = {{"a", 4}, {"b", 3}, {"c", 2}, {"d", 1}};
  const FrequencyReport r = frequency_report(table, {1, 2, 3, 4});
  CHECK(r.median_tags_per_record == 2.5);
  CHECK(r.mean_tags_per_record == 2.5);
}

TEST_CASE("identical vocabularies have jaccard one") {
  const Vocabulary v = vocab_of({"a", "b", "c"});
  const OverlapReport r = compare_vocabularies(v, v);
  CHECK(r.jaccard == 1.0);
  CHECK(r.intersection == 3);
  CHECK(r.only_first == 0);
  CHECK(r.only_second == 0);
}

TEST_CASE("disjoint vocabularies have jaccard zero") {
  const OverlapReport r = compare_vocabularies(vocab_of({"a", "b"}), vocab_of({"x", "y"}));
  CHECK(r.jaccard == 0.0);
  CHECK(r.intersection == 0);
}

TEST_CASE("strict subset of double size has jaccard one half") {
  const OverlapReport r =
      compare_vocabularies(vocab_of({"a", "b"}), vocab_of({"a", "b", "c", "d"}));
  CHECK(r.jaccard == 0.5);
  CHECK(r.intersection == 2);
  CHECK(r.only_first == 0);
  CHECK(r.only_second == 2);
}

TEST_CASE("swapping arguments swaps the difference counts and keeps jaccard") {
  const Vocabulary v1 = vocab_of({"a", "b", "c"});
  const Vocabulary v2 = vocab_of({"b", "c", "d", "e"});
  const OverlapReport fwd = compare_vocabularies(v1, v2);
  const OverlapReport rev = compare_vocabularies(v2, v1);
  CHECK(fwd.jaccard == rev.jaccard);
  CHECK(fwd.only_first == rev.only_second);
  CHECK(fwd.only_second == rev.only_first);
  CHECK(fwd.intersection == rev.intersection);
}

TEST_CASE("csv and json artifacts have the declared headers") {
  DfTable table;
  table.n_records = 2;
  table.counts = {{"a", 2}, {"b", 1}};
  const FrequencyReport r = frequency_report(table, {2, 1});
  testutil::TempDir dir("stats");
  const std::string freq = dir.file("freq.csv");
  write_frequency_csv(r, freq);
  CHECK(testutil::read_file(freq).rfind("rank,tag,count\n1,a,2\n", 0) == 0);
  const std::string loglog = dir.file("loglog.csv");
  write_loglog_csv(r, loglog);
  CHECK(testutil::read_file(loglog).rfind("log10_rank,log10_count\n", 0) == 0);
  const std::string summary = dir.file("summary.json");
  write_summary_json(r, summary);
  CHECK(testutil::read_file(summary).find("\"pool_size\": 2") != std::string::npos);
}

TEST_SUITE_END();
