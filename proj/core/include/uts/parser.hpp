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
#include <unordered_map>
#include <utility>
#include <vector>

#include "uts/corpus.hpp"
#include "uts/tags.hpp"

namespace uts {

// Chat-completion endpoint settings. `endpoint_url` may be the sentinel
// "fixture", in which case responses are replayed from `fixture_path`
// keyed by record id and no network is touched.
struct ParserConfig {
  std::string endpoint_url = "fixture";
  std::string model_name = "qwen2.5-7b-instruct";
  double temperature = 0.3;
  double top_p = 0.9;
  int max_retries = 3;  // total attempts per record
  std::optional<std::string> fixture_path;
  int jobs = 8;          // bounded in-flight requests
  int backoff_ms = 200;  // fixed backoff between attempts (live mode)

  bool fixture_mode() const { return endpoint_url == "fixture"; }
  void validate() const;  // throws std::invalid_argument
};

// The instruction prompt, stored as an external text asset with a single
// "{caption}" placeholder.
class PromptTemplate {
 public:
  static PromptTemplate load(const std::string& path);
  static PromptTemplate from_string(std::string text);

  // Substitute the caption at the placeholder position, exactly once.
  // Throws std::invalid_argument on an empty caption.
  std::string build(const std::string& caption) const;

  const std::string& text() const { return text_; }

 private:
  std::string text_;
  std::size_t placeholder_pos_ = 0;
};

enum class ParseErrorKind {
  kNotJson,              // response is not a JSON object after fence-stripping
  kMissingLabels,        // JSON object lacks a "labels" string array
  kEmptyAfterValidation  // no label survived normalization
};

const char* to_string(ParseErrorKind kind);

struct ParseError {
  ParseErrorKind kind;
  std::string message;
};

struct ParseResult {
  TagList tags;  // meaningful iff ok()
  std::vector<std::string> rejected;
  std::vector<std::string> warnings;
  std::optional<ParseError> error;

  bool ok() const { return !error.has_value(); }
};

// Validate and normalize one raw LLM response: strip optional code fences,
// parse the JSON object, read "labels", normalize and deduplicate.
ParseResult parse_response(const std::string& raw);

// Recorded responses keyed by id. An id may carry several rows; attempt n
// replays the n-th row (the last row repeats once the script runs out),
// which lets tests drive the retry path deterministically.
class FixtureStore {
 public:
  static FixtureStore load(const std::string& path);

  std::optional<std::string> response(const std::string& id, int attempt) const;
  bool contains(const std::string& id) const { return responses_.count(id) != 0; }
  std::size_t size() const { return responses_.size(); }

 private:
  std::unordered_map<std::string, std::vector<std::string>> responses_;
};

struct ParseFailure {
  std::string id;
  std::string error;
  int attempts = 0;
};

struct BatchResult {
  std::vector<std::pair<std::string, TagList>> parsed;  // input order
  std::vector<ParseFailure> failures;                   // input order
  std::vector<std::string> warnings;                    // "<id>: <warning>"
};

// Run build-prompt -> completion -> parse_response for every record, with up
// to max_retries attempts each. Retryable: transport errors and non-JSON
// responses. Validation-empty results and a missing "labels" key are
// permanent. Live mode reads UTS_PARSER_API_KEY for the Authorization
// header; fixture mode is fully deterministic and network-free.
BatchResult parse_batch(const std::vector<CaptionRecord>& records, const ParserConfig& config,
                        const PromptTemplate& prompt);

void write_tag_pairs(const std::vector<std::pair<std::string, TagList>>& pairs,
                     const std::string& path);
std::vector<std::pair<std::string, TagList>> read_tag_pairs(const std::string& path);
void write_parse_failures(const std::vector<ParseFailure>& failures, const std::string& path);

}  // namespace uts
