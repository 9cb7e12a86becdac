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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uts/vocab.hpp"

namespace uts {

struct FrequencyRow {
  int rank = 0;  // 1-based, contiguous
  std::string tag;
  std::int64_t count = 0;
};

// Rank-frequency view of the tag pool (the long-tail curve), plus dataset
// summary statistics.
struct FrequencyReport {
  std::vector<FrequencyRow> rows;  // counts non-increasing, ties by tag asc
  std::int64_t n_records = 0;
  std::int64_t pool_size = 0;
  std::int64_t total_tag_instances = 0;
  double mean_tags_per_record = 0.0;
  double median_tags_per_record = 0.0;
};

// Sort the table by count desc then tag asc and compute exact summary
// statistics. per_record_counts must list every record's tag count; its sum
// must equal the table's total (each record bumps each of its tags once).
FrequencyReport frequency_report(const DfTable& table,
                                 const std::vector<int>& per_record_counts);

struct OverlapReport {
  std::int64_t intersection = 0;
  std::int64_t only_first = 0;
  std::int64_t only_second = 0;
  double jaccard = 0.0;
};

OverlapReport compare_vocabularies(const Vocabulary& v1, const Vocabulary& v2);

void write_frequency_csv(const FrequencyReport& report, const std::string& path);
// log10(rank), log10(count) columns for external plotting.
void write_loglog_csv(const FrequencyReport& report, const std::string& path);
void write_summary_json(const FrequencyReport& report, const std::string& path);
void write_overlap_json(const OverlapReport& report, const std::string& path);

}  // namespace uts
