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

#include "uts/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace uts {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Strip a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string parse_value(const std::string& raw, int line_no) {
  const std::string v = trim(raw);
  if (v.empty()) throw std::runtime_error("toml line " + std::to_string(line_no) + ": empty value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw std::runtime_error("toml line " + std::to_string(line_no) + ": unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        ++i;
        switch (v[i]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default:
            throw std::runtime_error("toml line " + std::to_string(line_no) +
                                     ": unsupported escape");
        }
      } else {
        out += v[i];
      }
    }
    return out;
  }
  // bare value: number or boolean
  return v;
}

std::uint64_t parse_u64(const std::string& v, const std::string& what) {
  try {
    return std::stoull(v);
  } catch (const std::logic_error&) {
    throw std::runtime_error("config: bad integer for " + what + ": '" + v + "'");
  }
}

int parse_int(const std::string& v, const std::string& what) {
  try {
    return std::stoi(v);
  } catch (const std::logic_error&) {
    throw std::runtime_error("config: bad integer for " + what + ": '" + v + "'");
  }
}

double parse_double(const std::string& v, const std::string& what) {
  try {
    return std::stod(v);
  } catch (const std::logic_error&) {
    throw std::runtime_error("config: bad number for " + what + ": '" + v + "'");
  }
}

void apply_entry(PipelineConfig& c, const std::string& key, const std::string& value) {
  if (key == "corpus") c.corpus = value;
  else if (key == "records") c.records = value;
  else if (key == "fixtures") c.fixtures = value;
  else if (key == "tags") c.tags = value;
  else if (key == "vocabulary") c.vocabulary = value;
  else if (key == "labels") c.labels = value;
  else if (key == "prompt_template") c.prompt_template = value;
  else if (key == "k") c.k = parse_int(value, key);
  else if (key == "seed") c.seed = parse_u64(value, key);
  else if (key == "jobs") c.jobs = parse_int(value, key);
  else if (key == "parser.endpoint_url") c.parser.endpoint_url = value;
  else if (key == "parser.model_name") c.parser.model_name = value;
  else if (key == "parser.temperature") c.parser.temperature = parse_double(value, key);
  else if (key == "parser.top_p") c.parser.top_p = parse_double(value, key);
  else if (key == "parser.max_retries") c.parser.max_retries = parse_int(value, key);
  else if (key == "parser.fixture_path") c.parser.fixture_path = value;
  else if (key == "parser.jobs") c.parser.jobs = parse_int(value, key);
  else if (key == "parser.backoff_ms") c.parser.backoff_ms = parse_int(value, key);
  else throw std::runtime_error("config: unknown key '" + key + "'");
}

// UTS_PARSER_TOP_P -> parser.top_p etc.
const std::pair<const char*, const char*> kEnvKeys[] = {
    {"UTS_CORPUS", "corpus"},
    {"UTS_RECORDS", "records"},
    {"UTS_FIXTURES", "fixtures"},
    {"UTS_TAGS", "tags"},
    {"UTS_VOCABULARY", "vocabulary"},
    {"UTS_LABELS", "labels"},
    {"UTS_PROMPT_TEMPLATE", "prompt_template"},
    {"UTS_K", "k"},
    {"UTS_SEED", "seed"},
    {"UTS_JOBS", "jobs"},
    {"UTS_PARSER_ENDPOINT_URL", "parser.endpoint_url"},
    {"UTS_PARSER_MODEL_NAME", "parser.model_name"},
    {"UTS_PARSER_TEMPERATURE", "parser.temperature"},
    {"UTS_PARSER_TOP_P", "parser.top_p"},
    {"UTS_PARSER_MAX_RETRIES", "parser.max_retries"},
    {"UTS_PARSER_FIXTURE_PATH", "parser.fixture_path"},
    {"UTS_PARSER_BACKOFF_MS", "parser.backoff_ms"},
};

}  // namespace

std::map<std::string, std::string> parse_toml(const std::string& text) {
  std::map<std::string, std::string> out;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    ++line_no;
    std::string line = trim(strip_comment(text.substr(pos, eol - pos)));
    pos = eol + 1;
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("toml line " + std::to_string(line_no) + ": malformed section");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw std::runtime_error("toml line " + std::to_string(line_no) + ": empty section name");
    } else {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("toml line " + std::to_string(line_no) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty())
        throw std::runtime_error("toml line " + std::to_string(line_no) + ": empty key");
      const std::string full_key = section.empty() ? key : section + "." + key;
      out[full_key] = parse_value(line.substr(eq + 1), line_no);
    }
    if (eol == text.size()) break;
  }
  return out;
}

std::map<std::string, std::string> parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_toml(text);
}

PipelineConfig PipelineConfig::load(const std::string& toml_path) {
  PipelineConfig c;
  for (const auto& [key, value] : parse_toml_file(toml_path)) apply_entry(c, key, value);
  c.apply_environment();
  return c;
}

PipelineConfig PipelineConfig::from_environment() {
  PipelineConfig c;
  c.apply_environment();
  return c;
}

void PipelineConfig::apply_environment() {
  for (const auto& [env, key] : kEnvKeys) {
    if (const char* value = std::getenv(env)) apply_entry(*this, key, value);
  }
}

}  // namespace uts
