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

namespace uts {

// Machine-readable record of one pipeline stage run. Stages in live-endpoint
// mode mark themselves nondeterministic; everything else is reproducible
// from (inputs, seed, version).
struct RunManifest {
  std::string command;
  std::string version;
  std::map<std::string, std::string> inputs;   // name -> path
  std::map<std::string, std::string> outputs;  // name -> path
  std::uint64_t seed = 0;
  double wall_time_seconds = 0.0;
  bool deterministic = true;

  void save(const std::string& path) const;
  // Parses and validates required fields; throws on anything missing.
  static RunManifest load(const std::string& path);
};

}  // namespace uts
