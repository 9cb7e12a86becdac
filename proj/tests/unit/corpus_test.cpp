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

#include <doctest.h>

#include "support.hpp"
#include "uts/corpus.hpp"
#include "uts/rng.hpp"

using namespace uts;
using testutil::TempDir;
using testutil::write_file;

TEST_SUITE_BEGIN("corpus");

TEST_CASE("three well-formed lines load cleanly") {
  TempDir dir("corpus");
  const std::string path = write_file(dir, "c.jsonl",
      "{\"id\": \"a\", \"caption\": \"Rain.\"}\n"
      "{\"id\": \"b\", \"caption\": \"Dog.\", \"duration_seconds\": 3.5}\n"
      "{\"id\": \"c\", \"caption\": \"Wind.\", \"tags\": [\"wind\", \"outdoor\"]}\n");
  auto [records, report] = load_records(path);
  REQUIRE(records.size() == 3);
  CHECK(report.errors.empty());
  CHECK(records[0].id == "a");
  CHECK(records[1].duration_seconds == 3.5);
  REQUIRE(records[2].tags.has_value());
  CHECK(records[2].tags->items() == std::vector<std::string>{"wind", "outdoor"});
}

TEST_CASE("empty file yields no records and no errors") {
  TempDir dir("corpus");
  const std::string path = write_file(dir, "empty.jsonl", "");
  auto [records, report] = load_records(path);
  CHECK(records.empty());
  CHECK(report.errors.empty());
}

TEST_CASE("line lacking caption is reported with its line number") {
  TempDir dir("corpus");
  const std::string path = write_file(dir, "c.jsonl",
      "{\"id\": \"a\", \"caption\": \"Rain.\"}\n"
      "{\"id\": \"b\"}\n");
  auto [records, report] = load_records(path);
  CHECK(records.size() == 1);
  REQUIRE(report.errors.size() == 1);
  CHECK(report.errors[0].line == 2);
  CHECK(report.errors[0].error.find("caption") != std::string::npos);
}

TEST_CASE("malformed rows: bad json, empty id, duplicate id, bad tags, negative duration") {
  TempDir dir("corpus");
  const std::string path = write_file(dir, "c.jsonl",
      "this is not json\n"
      "{\"id\": \"\", \"caption\": \"x\"}\n"
      "{\"id\": \"a\", \"caption\": \"x\"}\n"
      "{\"id\": \"a\", \"caption\": \"y\"}\n"
      "{\"id\": \"b\", \"caption\": \"x\", \"tags\": [\"Not Normal\"]}\n"
      "{\"id\": \"c\", \"caption\": \"x\", \"duration_seconds\": -1}\n"
      "{\"id\": \"d\", \"caption\": \"   \"}\n");
  auto [records, report] = load_records(path);
  CHECK(records.size() == 1);
  REQUIRE(report.errors.size() == 6);
  CHECK(report.errors[0].line == 1);
  CHECK(report.errors[1].line == 2);
  CHECK(report.errors[2].line == 4);  // duplicate id
  CHECK(report.errors[2].error.find("duplicate") != std::string::npos);
  CHECK(report.errors[3].line == 5);
  CHECK(report.errors[4].line == 6);
  CHECK(report.errors[5].line == 7);
}

TEST_CASE("blank lines are skipped, not errors") {
  TempDir dir("corpus");
  const std::string path = write_file(dir, "c.jsonl",
      "{\"id\": \"a\", \"caption\": \"Rain.\"}\n\n   \n"
      "{\"id\": \"b\", \"caption\": \"Dog.\"}\n");
  auto [records, report] = load_records(path);
  CHECK(records.size() == 2);
  CHECK(report.errors.empty());
}

TEST_CASE("loading is deterministic") {
  TempDir dir("corpus");
  const std::string path = write_file(dir, "c.jsonl",
      "{\"id\": \"a\", \"caption\": \"Rain.\"}\n"
      "{\"id\": \"b\", \"caption\": \"Dog.\"}\n");
  auto [r1, rep1] = load_records(path);
  auto [r2, rep2] = load_records(path);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].id == r2[i].id);
    CHECK(r1[i].caption == r2[i].caption);
  }
}

TEST_CASE("load report serializes line and error fields") {
  TempDir dir("corpus");
  LoadReport report;
  report.errors.push_back({7, "missing caption"});
  const std::string path = dir.file("report.jsonl");
  write_load_report(report, path);
  const std::string text = testutil::read_file(path);
  CHECK(text.find("\"line\":7") != std::string::npos);
  CHECK(text.find("missing caption") != std::string::npos);
}

TEST_CASE("summary of the dog-training caption is its final paragraph") {
  const std::string caption = testutil::read_file(std::string(UTS_TEST_DATA_DIR) +
                                                  "/caption_dog_training.txt");
  REQUIRE(!caption.empty());
  const std::string summary = extract_summary(caption);
  CHECK(summary.rfind("In summary, this audio clip documents", 0) == 0);
  CHECK(summary.find("North American pet culture.") != std::string::npos);
  // One paragraph only: no blank lines inside.
  CHECK(summary.find("\n\n") == std::string::npos);
}

TEST_CASE("single-paragraph caption returns itself") {
  CHECK(extract_summary("A dog barks.") == "A dog barks.");
}

TEST_CASE("three paragraphs without a summary marker select the last") {
  CHECK(extract_summary("First.\n\nSecond.\n\nThird.") == "Third.");
}

TEST_CASE("summary marker wins over the last paragraph") {
  const std::string caption = "Opening.\n\nIn summary, the middle says it all.\n\nTrailing notes.";
  CHECK(extract_summary(caption) == "In summary, the middle says it all.");
}

TEST_CASE("summary detection is case-insensitive and tolerates decoration") {
  CHECK(extract_summary("A.\n\n**IN SUMMARY**, loud rain.\n\nB.") ==
        "**IN SUMMARY**, loud rain.");
  CHECK(extract_summary("A.\n\n\"In Summary\": quiet wind.") == "\"In Summary\": quiet wind.");
}

TEST_CASE("empty caption violates the precondition") {
  CHECK_THROWS_AS(extract_summary("   \n \t"), std::invalid_argument);
}

TEST_CASE("windows line endings delimit paragraphs the same way") {
  CHECK(extract_summary("First.\r\n\r\nSecond.\r\n\r\nIn summary, done.\r\n") ==
        "In summary, done.");
  CHECK(extract_summary("Only paragraph.\r\n") == "Only paragraph.");
}

TEST_CASE("summary is a trimmed contiguous substring and extraction is idempotent") {
  Rng rng(2026);
  const std::vector<std::string> sentences = {
      "Rain falls.", "A dog barks twice.", "In summary, everything is quiet.",
      "Traffic hums along.", "Someone whispers."};
  for (int trial = 0; trial < 200; ++trial) {
    std::string caption;
    const int paras = rng.uniform_int(1, 4);
    for (int p = 0; p < paras; ++p) {
      if (p > 0) caption += rng.uniform() < 0.5 ? "\n\n" : "\n   \n\n";
      const int lines = rng.uniform_int(1, 3);
      for (int l = 0; l < lines; ++l) {
        if (l > 0) caption += "\n";
        caption += sentences[rng.uniform_int(0, static_cast<int>(sentences.size()) - 1)];
      }
    }
    if (caption.empty()) caption = "x";
    const std::string summary = extract_summary(caption);
    CHECK(caption.find(summary) != std::string::npos);
    CHECK(extract_summary(summary) == summary);
    CHECK(!summary.empty());
  }
}

TEST_SUITE_END();
