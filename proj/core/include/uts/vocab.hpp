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
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "uts/tags.hpp"

namespace uts {

// Document frequencies over a tag pool: df(t) counts the records whose tag
// list contains t at least once; n_records is the number of contributing
// records. Partial tables built in parallel merge associatively.
struct DfTable {
  std::unordered_map<std::string, std::int64_t> counts;
  std::int64_t n_records = 0;

  void merge(const DfTable& other);
  void validate() const;  // 1 <= df(t) <= n_records, n_records >= 1
};

// One pass over the tag lists; each record bumps every distinct tag once.
// Throws std::invalid_argument on an empty sequence.
DfTable accumulate_df(const std::vector<TagList>& tag_lists);

// Salience score df * ln((n + 1) / (df + 1)). Document frequency enters
// both factors. Requires 1 <= df <= n.
double tfidf_score(std::int64_t df, std::int64_t n);

struct VocabEntry {
  std::string tag;
  std::int64_t df = 0;
  double score = 0.0;
};

// Total order used for selection: score desc, then df desc, then tag asc.
// Strict ties are impossible because tags are unique.
bool vocab_rank_before(const VocabEntry& a, const VocabEntry& b);

// The fixed tag system: top-k entries under the selection order, with
// stable 0-based indices frozen at selection time.
class Vocabulary {
 public:
  // Validates order, uniqueness and df range; used by the file loader.
  static Vocabulary from_entries(std::vector<VocabEntry> entries, std::int64_t n_records);

  const std::vector<VocabEntry>& entries() const { return entries_; }
  std::optional<int> index_of(const std::string& tag) const;
  int k() const { return static_cast<int>(entries_.size()); }
  std::int64_t n_records() const { return n_records_; }
  const std::string& tag_at(int index) const { return entries_[index].tag; }

  bool operator==(const Vocabulary& other) const;

 private:
  friend Vocabulary select_top_k(const DfTable&, int);
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, int> index_;
  std::int64_t n_records_ = 0;
};

// Score the pool and keep the best min(k, pool size) tags. Deterministic
// under any permutation of insertion order. Requires k >= 1.
Vocabulary select_top_k(const DfTable& table, int k);

// TSV round-trip: "# n_records=<N> k=<K>" comment, header row, then
// index/tag/df/score columns with scores printed to 9 decimal digits.
// Loading re-checks the invariants and reports the first offending line.
void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

}  // namespace uts
