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

#include "uts/labeler.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "uts/rng.hpp"

namespace uts {

using nlohmann::json;

MultihotResult to_multihot(const TagList& tags, const Vocabulary& vocab) {
  MultihotResult out;
  for (const std::string& tag : tags) {
    if (auto idx = vocab.index_of(tag)) {
      out.positives.push_back(*idx);
    } else {
      ++out.oov_count;
    }
  }
  std::sort(out.positives.begin(), out.positives.end());
  return out;
}

DatasetResult build_dataset(const std::vector<std::pair<std::string, TagList>>& pairs,
                            const Vocabulary& vocab) {
  DatasetResult out;
  std::unordered_set<std::string> seen;
  for (const auto& [id, tags] : pairs) {
    if (!seen.insert(id).second)
      throw std::invalid_argument("build_dataset: duplicate id '" + id + "'");
    MultihotResult hot = to_multihot(tags, vocab);
    out.oov_tags_total += hot.oov_count;
    if (hot.positives.empty()) {
      out.filtered.push_back({id});
      continue;
    }
    LabeledExample ex;
    ex.id = id;
    ex.k = vocab.k();
    ex.sequence = to_tag_sequence(hot.positives, vocab);
    ex.positives = std::move(hot.positives);
    out.examples.push_back(std::move(ex));
  }
  return out;
}

std::string to_tag_sequence(const std::vector<int>& positives, const Vocabulary& vocab,
                            TagOrder order, std::uint64_t seed) {
  if (positives.empty()) throw std::invalid_argument("to_tag_sequence: empty positives");
  std::vector<int> indices = positives;
  std::sort(indices.begin(), indices.end());
  for (int idx : indices) {
    if (idx < 0 || idx >= vocab.k())
      throw std::invalid_argument("to_tag_sequence: index " + std::to_string(idx) +
                                  " outside vocabulary of size " + std::to_string(vocab.k()));
  }
  if (order == TagOrder::shuffled) {
    Rng rng(seed);
    rng.shuffle(indices);
  }
  std::string out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i > 0) out += ", ";
    out += vocab.tag_at(indices[i]);
  }
  return out;
}

std::vector<int> sequence_to_positives(const std::string& sequence, const Vocabulary& vocab) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= sequence.size()) {
    std::size_t next = sequence.find(", ", pos);
    const std::string tag =
        next == std::string::npos ? sequence.substr(pos) : sequence.substr(pos, next - pos);
    auto idx = vocab.index_of(tag);
    if (!idx)
      throw std::invalid_argument("sequence_to_positives: unknown tag '" + tag + "'");
    out.push_back(*idx);
    if (next == std::string::npos) break;
    pos = next + 2;
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_labels(const std::vector<LabeledExample>& examples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write labels: " + path);
  for (const LabeledExample& ex : examples) {
    json j;
    j["id"] = ex.id;
    j["positives"] = ex.positives;
    j["sequence"] = ex.sequence;
    out << j.dump() << '\n';
  }
}

std::vector<LabeledExample> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open labels: " + path);
  std::vector<LabeledExample> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j.contains("positives") ||
        !j.contains("sequence"))
      throw std::runtime_error("labels line " + std::to_string(line_no) +
                               ": expected {\"id\", \"positives\", \"sequence\"}");
    LabeledExample ex;
    ex.id = j["id"].get<std::string>();
    ex.positives = j["positives"].get<std::vector<int>>();
    ex.sequence = j["sequence"].get<std::string>();
    if (ex.positives.empty() || !std::is_sorted(ex.positives.begin(), ex.positives.end()))
      throw std::runtime_error("labels line " + std::to_string(line_no) +
                               ": positives must be nonempty and sorted");
    out.push_back(std::move(ex));
  }
  return out;
}

void write_filter_report(const std::vector<FilterEntry>& filtered, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write filter report: " + path);
  for (const FilterEntry& f : filtered) {
    json j;
    j["id"] = f.id;
    j["reason"] = "zero-vector";
    out << j.dump() << '\n';
  }
}

}  // namespace uts
