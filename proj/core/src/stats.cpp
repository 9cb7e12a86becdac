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

#include "uts/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace uts {

FrequencyReport frequency_report(const DfTable& table,
                                 const std::vector<int>& per_record_counts) {
  table.validate();
  FrequencyReport report;
  report.n_records = table.n_records;
  report.pool_size = static_cast<std::int64_t>(table.counts.size());

  std::int64_t total = 0;
  for (const auto& [tag, count] : table.counts) {
    report.rows.push_back({0, tag, count});
    total += count;
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.tag < b.tag;
  });
  for (std::size_t i = 0; i < report.rows.size(); ++i)
    report.rows[i].rank = static_cast<int>(i) + 1;
  report.total_tag_instances = total;

  if (static_cast<std::int64_t>(per_record_counts.size()) != table.n_records)
    throw std::invalid_argument("frequency_report: per_record_counts size != n_records");
  std::int64_t per_record_sum = 0;
  for (int c : per_record_counts) per_record_sum += c;
  if (per_record_sum != total)
    throw std::invalid_argument(
        "frequency_report: per-record tag counts inconsistent with table totals");

  report.mean_tags_per_record = static_cast<double>(total) / table.n_records;
  std::vector<int> sorted = per_record_counts;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  report.median_tags_per_record =
      n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
  return report;
}

OverlapReport compare_vocabularies(const Vocabulary& v1, const Vocabulary& v2) {
  OverlapReport out;
  for (const VocabEntry& e : v1.entries()) {
    if (v2.index_of(e.tag))
      ++out.intersection;
    else
      ++out.only_first;
  }
  out.only_second = v2.k() - out.intersection;
  const std::int64_t uni = out.intersection + out.only_first + out.only_second;
  out.jaccard = uni == 0 ? 0.0 : static_cast<double>(out.intersection) / uni;
  return out;
}

void write_frequency_csv(const FrequencyReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write frequency csv: " + path);
  out << "rank,tag,count\n";
  for (const FrequencyRow& r : report.rows)
    out << r.rank << ',' << r.tag << ',' << r.count << '\n';
}

void write_loglog_csv(const FrequencyReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write log-log csv: " + path);
  out << "log10_rank,log10_count\n";
  char buf[64];
  for (const FrequencyRow& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%.9f,%.9f", std::log10(static_cast<double>(r.rank)),
                  std::log10(static_cast<double>(r.count)));
    out << buf << '\n';
  }
}

void write_summary_json(const FrequencyReport& report, const std::string& path) {
  nlohmann::json j;
  j["n_records"] = report.n_records;
  j["pool_size"] = report.pool_size;
  j["total_tag_instances"] = report.total_tag_instances;
  j["mean_tags_per_record"] = report.mean_tags_per_record;
  j["median_tags_per_record"] = report.median_tags_per_record;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write summary json: " + path);
  out << j.dump(2) << '\n';
}

void write_overlap_json(const OverlapReport& report, const std::string& path) {
  nlohmann::json j;
  j["intersection"] = report.intersection;
  j["only_first"] = report.only_first;
  j["only_second"] = report.only_second;
  j["jaccard"] = report.jaccard;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write overlap json: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace uts
