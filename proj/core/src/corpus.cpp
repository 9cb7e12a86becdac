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

#include "uts/corpus.hpp"

#include <cctype>
#include <stdexcept>

#include <json.hpp>

namespace uts {

namespace {

using nlohmann::json;

bool is_blank(const std::string& s, std::size_t begin, std::size_t end) {
  for (std::size_t i = begin; i < end; ++i)
    if (!std::isspace(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

// Byte ranges [begin, end) of nonempty paragraphs, split on blank lines.
std::vector<std::pair<std::size_t, std::size_t>> paragraph_ranges(const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t pos = 0;
  std::size_t para_begin = std::string::npos;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const bool blank = is_blank(text, pos, eol);
    if (blank) {
      if (para_begin != std::string::npos) {
        out.emplace_back(para_begin, pos);
        para_begin = std::string::npos;
      }
    } else if (para_begin == std::string::npos) {
      para_begin = pos;
    }
    if (eol == text.size()) break;
    pos = eol + 1;
  }
  if (para_begin != std::string::npos) out.emplace_back(para_begin, text.size());
  return out;
}

std::string trim_copy(const std::string& s, std::size_t begin, std::size_t end) {
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

// Skip whitespace plus quotation/markdown prefix characters, including the
// UTF-8 curly quotes captioner output tends to use.
std::size_t skip_decoration(const std::string& s, std::size_t i, std::size_t end) {
  static const char kAscii[] = "\"'*#>`_- \t";
  while (i < end) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::string_view(kAscii).find(static_cast<char>(c)) != std::string_view::npos) {
      ++i;
      continue;
    }
    if (c == 0xE2 && i + 2 < end && static_cast<unsigned char>(s[i + 1]) == 0x80) {
      const unsigned char d = static_cast<unsigned char>(s[i + 2]);
      if (d == 0x98 || d == 0x99 || d == 0x9C || d == 0x9D) {  // curly quotes
        i += 3;
        continue;
      }
    }
    break;
  }
  return i;
}

bool starts_with_in_summary(const std::string& s, std::size_t begin, std::size_t end) {
  static const std::string_view needle = "in summary";
  std::size_t i = skip_decoration(s, begin, end);
  if (end - i < needle.size()) return false;
  for (std::size_t k = 0; k < needle.size(); ++k) {
    char c = s[i + k];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != needle[k]) return false;
  }
  return true;
}

struct LineParse {
  std::optional<CaptionRecord> record;
  std::optional<std::string> error;
};

LineParse parse_record_line(const std::string& line) {
  LineParse out;
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    out.error = "not a JSON object";
    return out;
  }
  CaptionRecord rec;
  if (!j.contains("id") || !j["id"].is_string()) {
    out.error = "missing or non-string \"id\"";
    return out;
  }
  rec.id = j["id"].get<std::string>();
  if (rec.id.empty()) {
    out.error = "empty \"id\"";
    return out;
  }
  if (!j.contains("caption") || !j["caption"].is_string()) {
    out.error = "missing or non-string \"caption\"";
    return out;
  }
  rec.caption = j["caption"].get<std::string>();
  if (trim_copy(rec.caption, 0, rec.caption.size()).empty()) {
    out.error = "caption is empty after trimming";
    return out;
  }
  if (j.contains("tags")) {
    if (!j["tags"].is_array()) {
      out.error = "\"tags\" is not an array";
      return out;
    }
    std::vector<std::string> raw;
    for (const auto& t : j["tags"]) {
      if (!t.is_string()) {
        out.error = "\"tags\" contains a non-string entry";
        return out;
      }
      raw.push_back(t.get<std::string>());
    }
    // Pre-parsed tags must already be normalized; anything else means the
    // file was not produced by the parse stage.
    for (const std::string& t : raw) {
      if (!TagList::is_normalized(t)) {
        out.error = "tag not normalized: '" + t + "'";
        return out;
      }
    }
    try {
      rec.tags = TagList::from_validated(raw);
    } catch (const std::invalid_argument& e) {
      out.error = e.what();
      return out;
    }
  }
  if (j.contains("duration_seconds")) {
    if (!j["duration_seconds"].is_number()) {
      out.error = "\"duration_seconds\" is not a number";
      return out;
    }
    const double d = j["duration_seconds"].get<double>();
    if (d < 0.0) {
      out.error = "negative \"duration_seconds\"";
      return out;
    }
    rec.duration_seconds = d;
  }
  out.record = std::move(rec);
  return out;
}

}  // namespace

CorpusReader::CorpusReader(const std::string& path, CorpusFormat format) : in_(path) {
  (void)format;  // jsonl is the only format
  if (!in_) throw std::runtime_error("cannot open corpus file: " + path);
}

std::optional<CaptionRecord> CorpusReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (is_blank(line, 0, line.size())) continue;
    LineParse parsed = parse_record_line(line);
    if (parsed.error) {
      report_.errors.push_back({line_no_, *parsed.error});
      continue;
    }
    if (!seen_ids_.insert(parsed.record->id).second) {
      report_.errors.push_back({line_no_, "duplicate id: '" + parsed.record->id + "'"});
      continue;
    }
    return parsed.record;
  }
  return std::nullopt;
}

std::pair<std::vector<CaptionRecord>, LoadReport> load_records(const std::string& path,
                                                               CorpusFormat format) {
  CorpusReader reader(path, format);
  std::vector<CaptionRecord> records;
  while (auto rec = reader.next()) records.push_back(std::move(*rec));
  return {std::move(records), reader.report()};
}

std::string extract_summary(const std::string& caption) {
  if (trim_copy(caption, 0, caption.size()).empty())
    throw std::invalid_argument("extract_summary: caption is empty");
  const auto paras = paragraph_ranges(caption);
  for (auto it = paras.rbegin(); it != paras.rend(); ++it) {
    if (starts_with_in_summary(caption, it->first, it->second))
      return trim_copy(caption, it->first, it->second);
  }
  const auto& last = paras.back();
  return trim_copy(caption, last.first, last.second);
}

void write_load_report(const LoadReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write load report: " + path);
  for (const LoadError& e : report.errors) {
    nlohmann::json j;
    j["line"] = e.line;
    j["error"] = e.error;
    out << j.dump() << '\n';
  }
}

std::string record_to_json_line(const CaptionRecord& record) {
  nlohmann::json j;
  j["id"] = record.id;
  j["caption"] = record.caption;
  if (record.tags) j["tags"] = record.tags->items();
  if (record.duration_seconds) j["duration_seconds"] = *record.duration_seconds;
  return j.dump();
}

void write_records(const std::vector<CaptionRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write records: " + path);
  for (const CaptionRecord& r : records) out << record_to_json_line(r) << '\n';
}

}  // namespace uts
