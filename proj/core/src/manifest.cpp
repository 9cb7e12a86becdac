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

#include "uts/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace uts {

using nlohmann::json;

void RunManifest::save(const std::string& path) const {
  json j;
  j["command"] = command;
  j["version"] = version;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["seed"] = seed;
  j["wall_time_seconds"] = wall_time_seconds;
  j["deterministic"] = deterministic;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << j.dump(2) << '\n';
}

RunManifest RunManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw std::runtime_error("manifest is not a JSON object: " + path);
  for (const char* key :
       {"command", "version", "inputs", "outputs", "seed", "wall_time_seconds", "deterministic"})
    if (!j.contains(key))
      throw std::runtime_error("manifest missing required key '" + std::string(key) + "': " + path);
  RunManifest m;
  m.command = j["command"].get<std::string>();
  m.version = j["version"].get<std::string>();
  m.inputs = j["inputs"].get<std::map<std::string, std::string>>();
  m.outputs = j["outputs"].get<std::map<std::string, std::string>>();
  m.seed = j["seed"].get<std::uint64_t>();
  m.wall_time_seconds = j["wall_time_seconds"].get<double>();
  m.deterministic = j["deterministic"].get<bool>();
  return m;
}

}  // namespace uts
