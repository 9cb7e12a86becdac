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

#include "uts/parser.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <variant>

#include <httplib.h>
#include <json.hpp>

namespace uts {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Remove a surrounding ``` / ```json fence if present. Handles both the
// multi-line form and a fence collapsed onto one line.
std::string strip_code_fence(const std::string& raw) {
  std::string s = trim(raw);
  if (s.rfind("```", 0) != 0) return s;
  std::size_t i = 3;
  while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;  // language tag
  s = s.substr(i);
  const std::size_t closing = s.rfind("```");
  if (closing != std::string::npos) s = s.substr(0, closing);
  return trim(s);
}

struct TransportError {
  std::string message;
};

// Split "http://host:port/path" into a client base and request path.
struct EndpointUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

EndpointUrl split_endpoint_url(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw std::invalid_argument("endpoint_url must include a scheme: " + url);
  const std::size_t path_start = url.find('/', scheme_end + 3);
  EndpointUrl out;
  if (path_start == std::string::npos) {
    out.base = url;
    out.path = "/v1/chat/completions";
  } else {
    out.base = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  return out;
}

std::variant<std::string, TransportError> request_completion(httplib::Client& client,
                                                             const std::string& path,
                                                             const ParserConfig& config,
                                                             const std::string& prompt) {
  json body;
  body["model"] = config.model_name;
  body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = config.temperature;
  body["top_p"] = config.top_p;

  httplib::Headers headers;
  if (const char* key = std::getenv("UTS_PARSER_API_KEY"))
    headers.emplace("Authorization", std::string("Bearer ") + key);

  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) return TransportError{"transport: " + httplib::to_string(res.error())};
  if (res->status != 200)
    return TransportError{"transport: HTTP " + std::to_string(res->status)};
  json envelope = json::parse(res->body, nullptr, false);
  if (envelope.is_discarded() || !envelope.contains("choices") || !envelope["choices"].is_array() ||
      envelope["choices"].empty() || !envelope["choices"][0].contains("message") ||
      !envelope["choices"][0]["message"].contains("content") ||
      !envelope["choices"][0]["message"]["content"].is_string())
    return TransportError{"transport: malformed completion envelope"};
  return envelope["choices"][0]["message"]["content"].get<std::string>();
}

}  // namespace

void ParserConfig::validate() const {
  if (endpoint_url.empty()) throw std::invalid_argument("ParserConfig: empty endpoint_url");
  if (temperature < 0.0 || temperature > 2.0)
    throw std::invalid_argument("ParserConfig: temperature must be in [0, 2]");
  if (top_p <= 0.0 || top_p > 1.0)
    throw std::invalid_argument("ParserConfig: top_p must be in (0, 1]");
  if (max_retries < 1) throw std::invalid_argument("ParserConfig: max_retries must be >= 1");
  if (jobs < 1) throw std::invalid_argument("ParserConfig: jobs must be >= 1");
  if (backoff_ms < 0) throw std::invalid_argument("ParserConfig: backoff_ms must be >= 0");
  if (fixture_mode() && !fixture_path)
    throw std::invalid_argument("ParserConfig: fixture mode requires fixture_path");
}

PromptTemplate PromptTemplate::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open prompt template: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_string(std::move(text));
}

PromptTemplate PromptTemplate::from_string(std::string text) {
  static const std::string placeholder = "{caption}";
  const std::size_t pos = text.find(placeholder);
  if (pos == std::string::npos)
    throw std::invalid_argument("prompt template lacks a {caption} placeholder");
  if (text.find(placeholder, pos + placeholder.size()) != std::string::npos)
    throw std::invalid_argument("prompt template has more than one {caption} placeholder");
  PromptTemplate out;
  out.text_ = std::move(text);
  out.placeholder_pos_ = pos;
  return out;
}

std::string PromptTemplate::build(const std::string& caption) const {
  if (trim(caption).empty()) throw std::invalid_argument("build_prompt: caption is empty");
  std::string out;
  out.reserve(text_.size() + caption.size());
  out.append(text_, 0, placeholder_pos_);
  out.append(caption);
  out.append(text_, placeholder_pos_ + 9 /* strlen("{caption}") */, std::string::npos);
  // The template ends right after the placeholder, so the prompt ends with
  // the caption itself; trailing newline from the asset file is dropped.
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  return out;
}

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kNotJson: return "not_json";
    case ParseErrorKind::kMissingLabels: return "missing_labels";
    case ParseErrorKind::kEmptyAfterValidation: return "empty_after_validation";
  }
  return "unknown";
}

ParseResult parse_response(const std::string& raw) {
  ParseResult out;
  if (trim(raw).empty()) {
    out.error = ParseError{ParseErrorKind::kNotJson, "empty response"};
    return out;
  }
  const std::string body = strip_code_fence(raw);
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    out.error = ParseError{ParseErrorKind::kNotJson, "response is not a JSON object"};
    return out;
  }
  if (!j.contains("labels") || !j["labels"].is_array()) {
    out.error = ParseError{ParseErrorKind::kMissingLabels, "no \"labels\" array in response"};
    return out;
  }
  std::vector<std::string> raw_labels;
  for (const auto& item : j["labels"]) {
    if (item.is_string()) {
      raw_labels.push_back(item.get<std::string>());
    } else {
      out.rejected.push_back(item.dump());
    }
  }
  TagList::Validation v = TagList::from_raw(raw_labels);
  out.rejected.insert(out.rejected.end(), v.rejected.begin(), v.rejected.end());
  out.warnings = std::move(v.warnings);
  if (!v.ok) {
    out.error = ParseError{ParseErrorKind::kEmptyAfterValidation,
                           "no label survived validation"};
    return out;
  }
  out.tags = std::move(v.tags);
  return out;
}

FixtureStore FixtureStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture file: " + path);
  FixtureStore store;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("response") || !j["response"].is_string())
      throw std::runtime_error("fixture line " + std::to_string(line_no) +
                               ": expected {\"id\": str, \"response\": str}");
    store.responses_[j["id"].get<std::string>()].push_back(j["response"].get<std::string>());
  }
  return store;
}

std::optional<std::string> FixtureStore::response(const std::string& id, int attempt) const {
  auto it = responses_.find(id);
  if (it == responses_.end()) return std::nullopt;
  const auto& scripted = it->second;
  const std::size_t idx = std::min<std::size_t>(attempt, scripted.size() - 1);
  return scripted[idx];
}

BatchResult parse_batch(const std::vector<CaptionRecord>& records, const ParserConfig& config,
                        const PromptTemplate& prompt) {
  config.validate();

  std::optional<FixtureStore> fixtures;
  std::optional<EndpointUrl> endpoint;
  if (config.fixture_mode()) {
    fixtures = FixtureStore::load(*config.fixture_path);
  } else {
    endpoint = split_endpoint_url(config.endpoint_url);
  }

  const int n = static_cast<int>(records.size());
  std::vector<std::optional<TagList>> parsed(n);
  std::vector<std::optional<ParseFailure>> failed(n);
  std::vector<std::vector<std::string>> warnings(n);

  auto process_one = [&](int i, httplib::Client* client) {
    const CaptionRecord& rec = records[i];
    const std::string built = prompt.build(rec.caption);
    std::string last_error = "no attempts made";
    int attempts = 0;
    for (int attempt = 0; attempt < config.max_retries; ++attempt) {
      ++attempts;
      std::string raw;
      if (fixtures) {
        auto scripted = fixtures->response(rec.id, attempt);
        if (!scripted) {
          failed[i] = ParseFailure{rec.id, "fixture missing id", attempts};
          return;
        }
        raw = std::move(*scripted);
      } else {
        auto reply = request_completion(*client, endpoint->path, config, built);
        if (std::holds_alternative<TransportError>(reply)) {
          last_error = std::get<TransportError>(reply).message;
          if (attempt + 1 < config.max_retries && config.backoff_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(config.backoff_ms));
          continue;
        }
        raw = std::move(std::get<std::string>(reply));
      }
      ParseResult result = parse_response(raw);
      for (const std::string& r : result.rejected)
        warnings[i].push_back(rec.id + ": rejected label " + r);
      for (const std::string& w : result.warnings) warnings[i].push_back(rec.id + ": " + w);
      if (result.ok()) {
        parsed[i] = std::move(result.tags);
        return;
      }
      last_error = std::string(to_string(result.error->kind)) + ": " + result.error->message;
      // Only a non-JSON body is worth a resample; an empty-after-validation
      // or missing-key result would come back the same way.
      if (result.error->kind != ParseErrorKind::kNotJson) break;
      if (!fixtures && attempt + 1 < config.max_retries && config.backoff_ms > 0)
        std::this_thread::sleep_for(std::chrono::milliseconds(config.backoff_ms));
    }
    failed[i] = ParseFailure{rec.id, last_error, attempts};
  };

  const int workers = std::min(config.jobs, std::max(n, 1));
  if (workers <= 1) {
    std::optional<httplib::Client> client;
    if (endpoint) client.emplace(endpoint->base);
    for (int i = 0; i < n; ++i) process_one(i, client ? &*client : nullptr);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        std::optional<httplib::Client> client;
        if (endpoint) client.emplace(endpoint->base);
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1))
          process_one(i, client ? &*client : nullptr);
      });
    }
    for (auto& t : pool) t.join();
  }

  BatchResult out;
  for (int i = 0; i < n; ++i) {
    if (parsed[i]) out.parsed.emplace_back(records[i].id, std::move(*parsed[i]));
    if (failed[i]) out.failures.push_back(std::move(*failed[i]));
    for (auto& w : warnings[i]) out.warnings.push_back(std::move(w));
  }
  return out;
}

void write_tag_pairs(const std::vector<std::pair<std::string, TagList>>& pairs,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write tags file: " + path);
  for (const auto& [id, tags] : pairs) {
    json j;
    j["id"] = id;
    j["tags"] = tags.items();
    out << j.dump() << '\n';
  }
}

std::vector<std::pair<std::string, TagList>> read_tag_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tags file: " + path);
  std::vector<std::pair<std::string, TagList>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("tags") || !j["tags"].is_array())
      throw std::runtime_error("tags file line " + std::to_string(line_no) +
                               ": expected {\"id\": str, \"tags\": [str]}");
    std::vector<std::string> tags;
    for (const auto& t : j["tags"]) {
      if (!t.is_string())
        throw std::runtime_error("tags file line " + std::to_string(line_no) +
                                 ": non-string tag");
      tags.push_back(t.get<std::string>());
    }
    out.emplace_back(j["id"].get<std::string>(), TagList::from_validated(std::move(tags)));
  }
  return out;
}

void write_parse_failures(const std::vector<ParseFailure>& failures, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write failure report: " + path);
  for (const ParseFailure& f : failures) {
    json j;
    j["id"] = f.id;
    j["error"] = f.error;
    j["attempts"] = f.attempts;
    out << j.dump() << '\n';
  }
}

}  // namespace uts
