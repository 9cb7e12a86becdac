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

#include "uts/tags.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <unordered_set>

namespace uts {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool is_separator(char c) { return c == '-' || c == '_'; }

bool is_tag_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || is_separator(c);
}

}  // namespace

std::optional<std::string> TagList::normalize_label(const std::string& raw) {
  std::string t = trim(raw);
  if (t.empty()) return std::nullopt;
  for (char& c : t) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  for (char c : t) {
    if (!is_tag_char(c)) return std::nullopt;
  }
  // Hyphen/underscore must be internal.
  if (is_separator(t.front()) || is_separator(t.back())) return std::nullopt;
  return t;
}

bool TagList::is_normalized(const std::string& tag) {
  auto n = normalize_label(tag);
  return n.has_value() && *n == tag;
}

TagList::Validation TagList::from_raw(const std::vector<std::string>& raw_labels) {
  Validation out;
  std::unordered_set<std::string> seen;
  for (const std::string& raw : raw_labels) {
    auto norm = normalize_label(raw);
    if (!norm) {
      out.rejected.push_back(raw);
      continue;
    }
    if (!seen.insert(*norm).second) continue;  // duplicate, keep first
    out.tags.items_.push_back(std::move(*norm));
  }
  if (out.tags.items_.size() > kMaxTags) {
    out.warnings.push_back("tag count " + std::to_string(out.tags.items_.size()) +
                           " exceeds " + std::to_string(kMaxTags) + "; truncated");
    out.tags.items_.resize(kMaxTags);
  }
  const std::size_t n = out.tags.items_.size();
  if (n >= 1 && (n < 5 || n > 10)) {
    out.warnings.push_back("tag count " + std::to_string(n) +
                           " outside the 5-10 range requested by the prompt");
  }
  out.ok = !out.tags.items_.empty();
  return out;
}

TagList TagList::from_validated(std::vector<std::string> tags) {
  if (tags.empty()) throw std::invalid_argument("TagList: empty tag list");
  if (tags.size() > kMaxTags)
    throw std::invalid_argument("TagList: " + std::to_string(tags.size()) + " tags exceeds " +
                                std::to_string(kMaxTags));
  std::unordered_set<std::string> seen;
  for (const std::string& t : tags) {
    if (!is_normalized(t)) throw std::invalid_argument("TagList: label not normalized: '" + t + "'");
    if (!seen.insert(t).second) throw std::invalid_argument("TagList: duplicate label: '" + t + "'");
  }
  TagList out;
  out.items_ = std::move(tags);
  return out;
}

}  // namespace uts
