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

#include "uts/matrix.hpp"
#include "uts/toy_model.hpp"

namespace uts {

// Planted-structure generators: every tag (or pair) is a fixed random unit
// direction in feature space and each clip's frames are a noisy mixture of
// its positive directions, so ground truth is known exactly and learning
// thresholds are meaningful.
struct PlantedConfig {
  int n_samples = 2000;
  int num_tags = 20;
  int feat_dim = 80;
  int frames = 8;
  double noise = 0.05;
  int min_positives = 1;
  int max_positives = 3;
  std::uint64_t seed = 0;
};

struct PlantedDataset {
  std::vector<FeatureClip> clips;
  Matrix directions;  // one unit row per tag (or per sample for pairs)
  int num_tags = 0;
};

// Multi-tag clips for the mtc / par / mtl objectives.
PlantedDataset make_planted_tags(const PlantedConfig& config);

// Matched (audio, text) instances for the contrastive objective: one unique
// direction per sample, text_id = sample index.
PlantedDataset make_planted_pairs(const PlantedConfig& config);

}  // namespace uts
