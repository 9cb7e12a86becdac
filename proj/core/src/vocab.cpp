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

#include "uts/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace uts {

void DfTable::merge(const DfTable& other) {
  for (const auto& [tag, df] : other.counts) counts[tag] += df;
  n_records += other.n_records;
}

void DfTable::validate() const {
  if (n_records < 1) throw std::invalid_argument("DfTable: n_records must be >= 1");
  for (const auto& [tag, df] : counts) {
    if (df < 1 || df > n_records)
      throw std::invalid_argument("DfTable: df out of [1, N] for tag '" + tag + "'");
  }
}

DfTable accumulate_df(const std::vector<TagList>& tag_lists) {
  if (tag_lists.empty()) throw std::invalid_argument("accumulate_df: empty input");
  DfTable table;
  for (const TagList& list : tag_lists) {
    // TagList guarantees uniqueness, so each tag bumps its count once.
    for (const std::string& tag : list) ++table.counts[tag];
    ++table.n_records;
  }
  return table;
}

double tfidf_score(std::int64_t df, std::int64_t n) {
  if (df < 1 || df > n)
    throw std::invalid_argument("tfidf_score: df must satisfy 1 <= df <= n, got df=" +
                                std::to_string(df) + " n=" + std::to_string(n));
  return static_cast<double>(df) *
         std::log((static_cast<double>(n) + 1.0) / (static_cast<double>(df) + 1.0));
}

bool vocab_rank_before(const VocabEntry& a, const VocabEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.df != b.df) return a.df > b.df;
  return a.tag < b.tag;
}

Vocabulary Vocabulary::from_entries(std::vector<VocabEntry> entries, std::int64_t n_records) {
  if (n_records < 1) throw std::invalid_argument("Vocabulary: n_records must be >= 1");
  Vocabulary out;
  out.n_records_ = n_records;
  out.entries_ = std::move(entries);
  for (std::size_t i = 0; i < out.entries_.size(); ++i) {
    const VocabEntry& e = out.entries_[i];
    if (e.df < 1 || e.df > n_records)
      throw std::invalid_argument("Vocabulary: df out of range for tag '" + e.tag + "'");
    if (i > 0 && !vocab_rank_before(out.entries_[i - 1], e))
      throw std::invalid_argument("Vocabulary: entries out of order at position " +
                                  std::to_string(i));
    if (!out.index_.emplace(e.tag, static_cast<int>(i)).second)
      throw std::invalid_argument("Vocabulary: duplicate tag '" + e.tag + "'");
  }
  return out;
}

std::optional<int> Vocabulary::index_of(const std::string& tag) const {
  auto it = index_.find(tag);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Vocabulary::operator==(const Vocabulary& other) const {
  if (n_records_ != other.n_records_ || entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const VocabEntry& a = entries_[i];
    const VocabEntry& b = other.entries_[i];
    if (a.tag != b.tag || a.df != b.df || std::abs(a.score - b.score) > 1e-9) return false;
  }
  return true;
}

Vocabulary select_top_k(const DfTable& table, int k) {
  if (k < 1) throw std::invalid_argument("select_top_k: k must be >= 1");
  table.validate();
  std::vector<VocabEntry> entries;
  entries.reserve(table.counts.size());
  for (const auto& [tag, df] : table.counts)
    entries.push_back({tag, df, tfidf_score(df, table.n_records)});
  std::sort(entries.begin(), entries.end(), vocab_rank_before);
  if (static_cast<int>(entries.size()) > k) entries.resize(k);

  Vocabulary out;
  out.n_records_ = table.n_records;
  out.entries_ = std::move(entries);
  for (std::size_t i = 0; i < out.entries_.size(); ++i)
    out.index_.emplace(out.entries_[i].tag, static_cast<int>(i));
  return out;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary: " + path);
  out << "# n_records=" << vocab.n_records() << " k=" << vocab.k() << '\n';
  out << "index\ttag\tdf\tscore\n";
  char score_buf[64];
  for (int i = 0; i < vocab.k(); ++i) {
    const VocabEntry& e = vocab.entries()[i];
    std::snprintf(score_buf, sizeof(score_buf), "%.9f", e.score);
    out << i << '\t' << e.tag << '\t' << e.df << '\t' << score_buf << '\n';
  }
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary: " + path);

  auto fail = [&](int line_no, const std::string& why) -> void {
    throw std::runtime_error("vocabulary " + path + " line " + std::to_string(line_no) + ": " +
                             why);
  };

  std::string line;
  int line_no = 0;

  if (!std::getline(in, line)) fail(1, "missing header comment");
  ++line_no;
  std::int64_t n_records = 0;
  int declared_k = -1;
  if (std::sscanf(line.c_str(), "# n_records=%lld k=%d", (long long*)&n_records, &declared_k) != 2)
    fail(line_no, "expected '# n_records=<N> k=<K>'");

  if (!std::getline(in, line)) fail(2, "missing column header");
  ++line_no;
  if (line != "index\ttag\tdf\tscore") fail(line_no, "expected header 'index\\ttag\\tdf\\tscore'");

  std::vector<VocabEntry> entries;
  std::unordered_set<std::string> seen_tags;
  std::optional<VocabEntry> prev;
  int expected_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string index_s, tag, df_s, score_s;
    if (!std::getline(row, index_s, '\t') || !std::getline(row, tag, '\t') ||
        !std::getline(row, df_s, '\t') || !std::getline(row, score_s))
      fail(line_no, "expected 4 tab-separated columns");
    VocabEntry e;
    try {
      if (std::stoi(index_s) != expected_index) fail(line_no, "non-contiguous index");
      e.tag = tag;
      e.df = std::stoll(df_s);
      e.score = std::stod(score_s);
    } catch (const std::logic_error&) {
      fail(line_no, "malformed numeric column");
    }
    if (!seen_tags.insert(e.tag).second) fail(line_no, "duplicate tag '" + e.tag + "'");
    if (prev && !vocab_rank_before(*prev, e))
      fail(line_no, "row out of order (score desc, df desc, tag asc)");
    prev = e;
    entries.push_back(std::move(e));
    ++expected_index;
  }
  if (declared_k != static_cast<int>(entries.size()))
    fail(line_no, "k=" + std::to_string(declared_k) + " does not match " +
                      std::to_string(entries.size()) + " rows");
  return Vocabulary::from_entries(std::move(entries), n_records);
}

}  // namespace uts
