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

#include <cstdint>
#include <map>
#include <string>

#include "uts/parser.hpp"

namespace uts {

// Pipeline-wide settings shared by the CLI stages: stage file paths, the
// vocabulary size, the root seed (per-stage sub-seeds derive from it) and
// the parser endpoint settings.
//
// Sources, lowest to highest precedence: built-in defaults, the TOML config
// file, UTS_-prefixed environment variables, command-line flags.
struct PipelineConfig {
  std::string corpus;
  std::string records;   // validated records from the ingest stage
  std::string fixtures;
  std::string tags;      // parse-stage output
  std::string vocabulary;
  std::string labels;
  std::string prompt_template;
  int k = 1500;
  std::uint64_t seed = 0;
  int jobs = 8;
  ParserConfig parser;

  // Parse the TOML file and fold in UTS_* environment overrides.
  static PipelineConfig load(const std::string& toml_path);
  // Environment overrides only (used when no config file is given).
  static PipelineConfig from_environment();

  void apply_environment();
};

// Minimal TOML reader covering what the pipeline config needs: [section]
// headers, bare keys, quoted strings, integers, floats, booleans and '#'
// comments. Keys are returned as "section.key".
std::map<std::string, std::string> parse_toml_file(const std::string& path);
std::map<std::string, std::string> parse_toml(const std::string& text);

}  // namespace uts
