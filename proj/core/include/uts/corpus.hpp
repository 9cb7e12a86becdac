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

#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "uts/tags.hpp"

namespace uts {

// One audio clip's caption-level supervision.
struct CaptionRecord {
  std::string id;
  std::string caption;
  std::optional<TagList> tags;  // present when parsing already ran
  std::optional<double> duration_seconds;
};

enum class CorpusFormat { jsonl };

struct LoadError {
  int line = 0;  // 1-based
  std::string error;
};

struct LoadReport {
  std::vector<LoadError> errors;
};

// Streaming JSONL reader. Malformed lines are recorded with their line
// number in the report and skipped; well-formed records come back in file
// order. Records are plain values, safe to hand to parallel workers.
class CorpusReader {
 public:
  explicit CorpusReader(const std::string& path, CorpusFormat format = CorpusFormat::jsonl);

  // Next well-formed record, or std::nullopt at end of file.
  std::optional<CaptionRecord> next();

  const LoadReport& report() const { return report_; }

 private:
  std::ifstream in_;
  int line_no_ = 0;
  LoadReport report_;
  std::unordered_set<std::string> seen_ids_;
};

// Eager convenience wrapper around CorpusReader.
std::pair<std::vector<CaptionRecord>, LoadReport> load_records(
    const std::string& path, CorpusFormat format = CorpusFormat::jsonl);

// Select the summary paragraph of a caption: the last paragraph whose first
// sentence begins with "In summary" (case-insensitive, tolerating leading
// quotation/markdown characters), else the last nonempty paragraph.
// Paragraphs are delimited by blank lines. The result is a contiguous
// substring of the input with surrounding whitespace trimmed.
std::string extract_summary(const std::string& caption);

void write_load_report(const LoadReport& report, const std::string& path);

// Serialization used by the ingest/parse stages.
std::string record_to_json_line(const CaptionRecord& record);
void write_records(const std::vector<CaptionRecord>& records, const std::string& path);

}  // namespace uts
