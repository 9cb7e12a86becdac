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
#include <utility>
#include <vector>

#include "uts/tags.hpp"
#include "uts/vocab.hpp"

namespace uts {

// A record's sparse multi-hot label plus its canonical tag sequence.
// `positives` is strictly increasing, nonempty, each index in [0, k);
// `sequence` joins the positive tags with ", " in ascending index order.
struct LabeledExample {
  std::string id;
  std::vector<int> positives;
  int k = 0;
  std::string sequence;
};

struct MultihotResult {
  std::vector<int> positives;  // sorted ascending, possibly empty
  int oov_count = 0;           // tags not found in the vocabulary
};

// Index j is included iff vocabulary tag j appears in `tags`.
MultihotResult to_multihot(const TagList& tags, const Vocabulary& vocab);

struct FilterEntry {
  std::string id;  // reason is always "zero-vector"
};

struct DatasetResult {
  std::vector<LabeledExample> examples;
  std::vector<FilterEntry> filtered;
  std::int64_t oov_tags_total = 0;
};

// Label every (id, tags) pair against the vocabulary; samples whose label
// would be a zero-vector are filtered out and listed in the report, so
// examples.size() + filtered.size() == pairs.size(). Duplicate ids throw.
DatasetResult build_dataset(const std::vector<std::pair<std::string, TagList>>& pairs,
                            const Vocabulary& vocab);

enum class TagOrder { canonical, shuffled };

// Render positives as a comma-separated tag string. Canonical order is
// ascending vocabulary index; shuffled is a seeded permutation for
// order-robustness experiments. Throws on empty positives.
std::string to_tag_sequence(const std::vector<int>& positives, const Vocabulary& vocab,
                            TagOrder order = TagOrder::canonical, std::uint64_t seed = 0);

// Inverse of the canonical rendering: parse a ", "-separated sequence back
// into sorted vocabulary indices. Unknown tags throw.
std::vector<int> sequence_to_positives(const std::string& sequence, const Vocabulary& vocab);

void write_labels(const std::vector<LabeledExample>& examples, const std::string& path);
std::vector<LabeledExample> read_labels(const std::string& path);
void write_filter_report(const std::vector<FilterEntry>& filtered, const std::string& path);

}  // namespace uts
