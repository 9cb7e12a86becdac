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

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "support.hpp"
#include "uts/parser.hpp"
#include "uts/rng.hpp"

using namespace uts;
using testutil::TempDir;
using testutil::write_file;

namespace {

const char* prompt_asset_path() { return UTS_PROMPT_PATH; }

std::string serialize_labels(const std::vector<std::string>& labels) {
  nlohmann::json j;
  j["labels"] = labels;
  return j.dump();
}

CaptionRecord record(const std::string& id, const std::string& caption) {
  CaptionRecord r;
  r.id = id;
  r.caption = caption;
  return r;
}

}  // namespace

TEST_SUITE_BEGIN("parser");

TEST_CASE("prompt contains the one-word rule and ends with the caption") {
  const PromptTemplate tmpl = PromptTemplate::load(prompt_asset_path());
  const std::string prompt = tmpl.build("rain on a tin roof");
  CHECK(prompt.find("Each label must be ONE WORD.") != std::string::npos);
  CHECK(prompt.find("\"labels\"") != std::string::npos);
  const std::string tail = "rain on a tin roof";
  REQUIRE(prompt.size() >= tail.size());
  CHECK(prompt.substr(prompt.size() - tail.size()) == tail);
}

TEST_CASE("caption containing the placeholder literally is substituted once") {
  const PromptTemplate tmpl = PromptTemplate::from_string("A {caption} B");
  CHECK(tmpl.build("x {caption} y") == "A x {caption} y B");
}

TEST_CASE("empty caption violates the precondition") {
  const PromptTemplate tmpl = PromptTemplate::from_string("say: {caption}");
  CHECK_THROWS_AS(tmpl.build(""), std::invalid_argument);
  CHECK_THROWS_AS(tmpl.build("  \n "), std::invalid_argument);
}

TEST_CASE("template without or with duplicate placeholder is rejected") {
  CHECK_THROWS_AS(PromptTemplate::from_string("no placeholder"), std::invalid_argument);
  CHECK_THROWS_AS(PromptTemplate::from_string("{caption} and {caption}"), std::invalid_argument);
}

TEST_CASE("normalization, rejection and dedup on a mixed response") {
  const ParseResult r = parse_response(R"({"labels":["Dog","bark","dog","indoor noise"]})");
  REQUIRE(r.ok());
  CHECK(r.tags.items() == std::vector<std::string>{"dog", "bark"});
  REQUIRE(r.rejected.size() == 1);
  CHECK(r.rejected[0] == "indoor noise");
}

TEST_CASE("fenced response is unwrapped") {
  const ParseResult r = parse_response("```json\n{\"labels\":[\"rain\"]}\n```");
  REQUIRE(r.ok());
  CHECK(r.tags.items() == std::vector<std::string>{"rain"});
}

TEST_CASE("a ten-label music response passes through unchanged") {
  const std::vector<std::string> labels = {"music", "electronic", "house", "acid", "drum",
                                           "bass",  "synth",      "vocal", "production",
                                           "nostalgia"};
  const ParseResult r = parse_response(serialize_labels(labels));
  REQUIRE(r.ok());
  CHECK(r.tags.items() == labels);
  CHECK(r.rejected.empty());
  CHECK(r.warnings.empty());
}

TEST_CASE("error kinds are distinguishable") {
  CHECK(parse_response("not json at all").error->kind == ParseErrorKind::kNotJson);
  CHECK(parse_response(R"({"notlabels":[]})").error->kind == ParseErrorKind::kMissingLabels);
  CHECK(parse_response(R"({"labels":["!!!"]})").error->kind ==
        ParseErrorKind::kEmptyAfterValidation);
}

TEST_CASE("parse_response o serialize is the identity on valid tag lists") {
  Rng rng(7);
  const std::vector<std::string> pool = {"dog",  "bark", "rain",     "low_fidelity", "lo-fi",
                                         "8bit", "hum",  "birdsong", "crowd",        "wind"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> take = pool;
    rng.shuffle(take);
    take.resize(static_cast<std::size_t>(rng.uniform_int(1, static_cast<int>(pool.size()))));
    const TagList tags = TagList::from_validated(take);
    const ParseResult r = parse_response(serialize_labels(tags.items()));
    REQUIRE(r.ok());
    CHECK(r.tags == tags);         // identity
    CHECK(r.rejected.empty());
  }
}

TEST_CASE("fixture batch: both ids present") {
  TempDir dir("parser");
  const std::string fixtures = write_file(
      dir, "f.jsonl",
      "{\"id\": \"a\", \"response\": \"{\\\"labels\\\": [\\\"rain\\\"]}\"}\n"
      "{\"id\": \"b\", \"response\": \"{\\\"labels\\\": [\\\"dog\\\", \\\"bark\\\"]}\"}\n");
  ParserConfig config;
  config.fixture_path = fixtures;
  const PromptTemplate tmpl = PromptTemplate::from_string("p: {caption}");
  const BatchResult result =
      parse_batch({record("a", "rain"), record("b", "dog")}, config, tmpl);
  REQUIRE(result.parsed.size() == 2);
  CHECK(result.failures.empty());
  CHECK(result.parsed[0].first == "a");
  CHECK(result.parsed[1].first == "b");
  CHECK(result.parsed[1].second.items() == std::vector<std::string>{"dog", "bark"});
}

TEST_CASE("fixture batch: missing id lands in the failure report") {
  TempDir dir("parser");
  const std::string fixtures = write_file(
      dir, "f.jsonl", "{\"id\": \"a\", \"response\": \"{\\\"labels\\\": [\\\"rain\\\"]}\"}\n");
  ParserConfig config;
  config.fixture_path = fixtures;
  const PromptTemplate tmpl = PromptTemplate::from_string("p: {caption}");
  const BatchResult result =
      parse_batch({record("a", "rain"), record("b", "dog")}, config, tmpl);
  REQUIRE(result.parsed.size() == 1);
  REQUIRE(result.failures.size() == 1);
  CHECK(result.failures[0].id == "b");
  CHECK(result.failures[0].error.find("fixture missing id") != std::string::npos);
}

TEST_CASE("scripted fixture: invalid JSON then valid succeeds within two attempts") {
  TempDir dir("parser");
  const std::string fixtures = write_file(
      dir, "f.jsonl",
      "{\"id\": \"a\", \"response\": \"oops not json\"}\n"
      "{\"id\": \"a\", \"response\": \"{\\\"labels\\\": [\\\"rain\\\"]}\"}\n");
  ParserConfig config;
  config.fixture_path = fixtures;
  config.max_retries = 2;
  const PromptTemplate tmpl = PromptTemplate::from_string("p: {caption}");
  const BatchResult result = parse_batch({record("a", "rain")}, config, tmpl);
  REQUIRE(result.parsed.size() == 1);
  CHECK(result.failures.empty());
  CHECK(result.parsed[0].second.items() == std::vector<std::string>{"rain"});
}

TEST_CASE("validation-empty results are never retried") {
  TempDir dir("parser");
  // Attempt 1 parses but validates empty; the valid second row must not be
  // consulted because empty-after-validation is permanent.
  const std::string fixtures = write_file(
      dir, "f.jsonl",
      "{\"id\": \"a\", \"response\": \"{\\\"labels\\\": [\\\"!!!\\\"]}\"}\n"
      "{\"id\": \"a\", \"response\": \"{\\\"labels\\\": [\\\"rain\\\"]}\"}\n");
  ParserConfig config;
  config.fixture_path = fixtures;
  config.max_retries = 3;
  const PromptTemplate tmpl = PromptTemplate::from_string("p: {caption}");
  const BatchResult result = parse_batch({record("a", "rain")}, config, tmpl);
  CHECK(result.parsed.empty());
  REQUIRE(result.failures.size() == 1);
  CHECK(result.failures[0].attempts == 1);
  CHECK(result.failures[0].error.find("empty_after_validation") != std::string::npos);
}

TEST_CASE("fixture batch is deterministic across jobs settings") {
  TempDir dir("parser");
  std::string lines;
  std::vector<CaptionRecord> records;
  for (int i = 0; i < 40; ++i) {
    const std::string id = "rec" + std::to_string(i);
    lines += "{\"id\": \"" + id + "\", \"response\": \"{\\\"labels\\\": [\\\"tag" +
             std::to_string(i) + "\\\"]}\"}\n";
    records.push_back(record(id, "caption " + std::to_string(i)));
  }
  const std::string fixtures = write_file(dir, "f.jsonl", lines);
  const PromptTemplate tmpl = PromptTemplate::from_string("p: {caption}");
  ParserConfig serial;
  serial.fixture_path = fixtures;
  serial.jobs = 1;
  ParserConfig parallel = serial;
  parallel.jobs = 8;
  const BatchResult a = parse_batch(records, serial, tmpl);
  const BatchResult b = parse_batch(records, parallel, tmpl);
  REQUIRE(a.parsed.size() == records.size());
  REQUIRE(b.parsed.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(a.parsed[i].first == b.parsed[i].first);
    CHECK(a.parsed[i].second == b.parsed[i].second);
  }
}

TEST_CASE("random byte noise never crashes the response parser") {
  Rng rng(2027);
  const std::string seeds =
      "{}[]\"`\\labels:,rain dog \n\r\t\xc3\xa9\xe2\x80\x9c!@#$%^&*()";
  for (int trial = 0; trial < 500; ++trial) {
    std::string raw;
    const int len = rng.uniform_int(0, 60);
    for (int i = 0; i < len; ++i)
      raw += seeds[rng.uniform_int(0, static_cast<int>(seeds.size()) - 1)];
    const ParseResult r = parse_response(raw);
    if (r.ok()) {
      CHECK(!r.tags.empty());  // success always carries at least one tag
    } else {
      CHECK(to_string(r.error->kind) != std::string("unknown"));
    }
  }
}

TEST_CASE("parser config validation") {
  ParserConfig config;
  config.fixture_path = "x";
  CHECK_NOTHROW(config.validate());
  ParserConfig bad_temp = config;
  bad_temp.temperature = 2.5;
  CHECK_THROWS_AS(bad_temp.validate(), std::invalid_argument);
  ParserConfig bad_top_p = config;
  bad_top_p.top_p = 0.0;
  CHECK_THROWS_AS(bad_top_p.validate(), std::invalid_argument);
  ParserConfig no_fixture;
  CHECK_THROWS_AS(no_fixture.validate(), std::invalid_argument);
}

TEST_CASE("tag pairs round-trip through the jsonl file") {
  TempDir dir("parser");
  std::vector<std::pair<std::string, TagList>> pairs;
  pairs.emplace_back("a", TagList::from_validated({"rain", "wind"}));
  pairs.emplace_back("b", TagList::from_validated({"dog"}));
  const std::string path = dir.file("tags.jsonl");
  write_tag_pairs(pairs, path);
  const auto loaded = read_tag_pairs(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].first == "a");
  CHECK(loaded[0].second == pairs[0].second);
  CHECK(loaded[1].second == pairs[1].second);
}

TEST_CASE("live endpoint: retry on HTTP 500, then success with auth header") {
  httplib::Server server;
  std::atomic<int> calls{0};
  std::string seen_auth;
  std::string seen_model;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    const int call = ++calls;
    if (auto it = req.headers.find("Authorization"); it != req.headers.end())
      seen_auth = it->second;
    const auto body = nlohmann::json::parse(req.body);
    seen_model = body.at("model").get<std::string>();
    if (call == 1) {
      res.status = 500;
      return;
    }
    nlohmann::json reply;
    reply["choices"] = {{{"message", {{"content", "{\"labels\": [\"rain\", \"wind\"]}"}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("UTS_PARSER_API_KEY", "sekrit", 1);
  ParserConfig config;
  config.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  config.model_name = "test-model";
  config.max_retries = 3;
  config.backoff_ms = 0;
  config.jobs = 1;
  const PromptTemplate tmpl = PromptTemplate::from_string("p: {caption}");
  const BatchResult result = parse_batch({record("a", "rain")}, config, tmpl);
  server.stop();
  server_thread.join();
  unsetenv("UTS_PARSER_API_KEY");

  REQUIRE(result.parsed.size() == 1);
  CHECK(result.parsed[0].second.items() == std::vector<std::string>{"rain", "wind"});
  CHECK(calls.load() == 2);
  CHECK(seen_auth == "Bearer sekrit");
  CHECK(seen_model == "test-model");
}

TEST_CASE("live endpoint: unreachable server fails after max_retries") {
  ParserConfig config;
  config.endpoint_url = "http://127.0.0.1:9";  // discard port, nothing listens
  config.max_retries = 2;
  config.backoff_ms = 0;
  config.jobs = 1;
  const PromptTemplate tmpl = PromptTemplate::from_string("p: {caption}");
  const BatchResult result = parse_batch({record("a", "rain")}, config, tmpl);
  CHECK(result.parsed.empty());
  REQUIRE(result.failures.size() == 1);
  CHECK(result.failures[0].attempts == 2);
  CHECK(result.failures[0].error.find("transport") != std::string::npos);
}

TEST_SUITE_END();
