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

#include <optional>
#include <string>
#include <vector>

namespace uts {

// A validated, order-preserving list of normalized tags.
//
// Invariants: every tag is lowercase, drawn from [a-z0-9] plus internal
// hyphen/underscore, no whitespace, no duplicates, and the list holds
// between 1 and 16 entries.
class TagList {
 public:
  static constexpr std::size_t kMaxTags = 16;

  struct Validation;

  TagList() = default;

  // Lowercase + trim, then check content rules. Returns std::nullopt when
  // the label cannot be repaired (whitespace inside, bad punctuation,
  // leading/trailing separators, empty).
  static std::optional<std::string> normalize_label(const std::string& raw);

  // True iff `tag` is already in normalized form.
  static bool is_normalized(const std::string& tag);

  // Normalize every label, drop invalid ones, deduplicate preserving first
  // occurrence, truncate to kMaxTags. Counts outside the 5-10 range the
  // parser prompt asks for are recorded as warnings, not errors.
  static Validation from_raw(const std::vector<std::string>& raw_labels);

  // Strict constructor for data that must already satisfy the invariants
  // (vocabulary files, label files we wrote ourselves). Throws
  // std::invalid_argument naming the first offending label.
  static TagList from_validated(std::vector<std::string> tags);

  const std::vector<std::string>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const std::string& operator[](std::size_t i) const { return items_[i]; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  bool operator==(const TagList& other) const { return items_ == other.items_; }

 private:
  std::vector<std::string> items_;
};

// Outcome of validating a raw label list. `tags` is meaningful only when
// `ok` is true (at least one label survived).
struct TagList::Validation {
  TagList tags;
  std::vector<std::string> rejected;  // labels that failed content rules
  std::vector<std::string> warnings;  // count drift, truncation
  bool ok = false;
};

}  // namespace uts
