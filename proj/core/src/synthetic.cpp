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

#include "uts/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "uts/rng.hpp"

namespace uts {

namespace {

Matrix unit_directions(int count, int dim, Rng& rng) {
  Matrix dirs(count, dim);
  for (int i = 0; i < count; ++i) {
    double norm2 = 0.0;
    for (int d = 0; d < dim; ++d) {
      dirs(i, d) = rng.normal();
      norm2 += dirs(i, d) * dirs(i, d);
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (int d = 0; d < dim; ++d) dirs(i, d) *= inv;
  }
  return dirs;
}

void validate(const PlantedConfig& c) {
  if (c.n_samples < 1 || c.num_tags < 1 || c.feat_dim < 1 || c.frames < 1)
    throw std::invalid_argument("PlantedConfig: dimensions must be positive");
  if (c.min_positives < 1 || c.max_positives < c.min_positives ||
      c.max_positives > c.num_tags)
    throw std::invalid_argument("PlantedConfig: bad positives range");
  if (c.noise < 0.0) throw std::invalid_argument("PlantedConfig: negative noise");
}

}  // namespace

PlantedDataset make_planted_tags(const PlantedConfig& config) {
  validate(config);
  Rng rng(Rng::derive(config.seed, "planted-tags"));
  PlantedDataset out;
  out.num_tags = config.num_tags;
  out.directions = unit_directions(config.num_tags, config.feat_dim, rng);

  std::vector<int> tag_pool(config.num_tags);
  std::iota(tag_pool.begin(), tag_pool.end(), 0);

  out.clips.reserve(config.n_samples);
  for (int i = 0; i < config.n_samples; ++i) {
    FeatureClip clip;
    const int n_pos = rng.uniform_int(config.min_positives, config.max_positives);
    rng.shuffle(tag_pool);
    clip.positives.assign(tag_pool.begin(), tag_pool.begin() + n_pos);
    std::sort(clip.positives.begin(), clip.positives.end());

    clip.frames = Matrix(config.frames, config.feat_dim);
    std::vector<double> weights(n_pos);
    for (int t = 0; t < config.frames; ++t) {
      double total = 0.0;
      for (int j = 0; j < n_pos; ++j) {
        weights[j] = 0.5 + rng.uniform();
        total += weights[j];
      }
      for (int j = 0; j < n_pos; ++j) {
        const double w = weights[j] / total;
        for (int d = 0; d < config.feat_dim; ++d)
          clip.frames(t, d) += w * out.directions(clip.positives[j], d);
      }
      for (int d = 0; d < config.feat_dim; ++d)
        clip.frames(t, d) += config.noise * rng.normal();
    }
    out.clips.push_back(std::move(clip));
  }
  return out;
}

PlantedDataset make_planted_pairs(const PlantedConfig& config) {
  validate(config);
  Rng rng(Rng::derive(config.seed, "planted-pairs"));
  PlantedDataset out;
  out.num_tags = config.n_samples;
  out.directions = unit_directions(config.n_samples, config.feat_dim, rng);

  out.clips.reserve(config.n_samples);
  for (int i = 0; i < config.n_samples; ++i) {
    FeatureClip clip;
    clip.text_id = i;
    clip.frames = Matrix(config.frames, config.feat_dim);
    for (int t = 0; t < config.frames; ++t)
      for (int d = 0; d < config.feat_dim; ++d)
        clip.frames(t, d) = out.directions(i, d) + config.noise * rng.normal();
    out.clips.push_back(std::move(clip));
  }
  return out;
}

}  // namespace uts
