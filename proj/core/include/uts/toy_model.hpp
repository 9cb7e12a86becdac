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
#include <optional>
#include <string>
#include <vector>

#include "uts/matrix.hpp"
#include "uts/objectives.hpp"
#include "uts/rng.hpp"

namespace uts {

// A synthetic clip: frames of feature vectors plus its sparse label. For
// contrastive training, text_id selects the matched row of the text
// embedding table.
struct FeatureClip {
  Matrix frames;               // T_f x F
  std::vector<int> positives;  // sorted tag indices (may be empty when unused)
  int text_id = -1;
};

enum class PoolKind { mean, attention };

struct ToyModelConfig {
  int feat_dim = 80;   // F
  int hidden_dim = 32; // encoder hidden width
  int embed_dim = 32;  // D
  PoolKind pool = PoolKind::mean;
  int heads = 4;       // attention pooling heads; embed_dim % heads == 0
  int num_tags = 20;   // K, also the token space V of the sequence head
  int t_max = 4;       // learned position queries
  int text_rows = 0;   // text embedding table rows (0 = none)

  void validate() const;
};

// All learnable tensors by name. Vectors are stored as 1 x N matrices so
// the SGD loop and the finite-difference harness can treat every parameter
// uniformly.
using ParamMap = std::map<std::string, Matrix>;

struct ToyModelParams {
  ToyModelConfig config;
  ParamMap tensors;

  Matrix& at(const std::string& name);
  const Matrix& at(const std::string& name) const;
};

ToyModelParams init_params(const ToyModelConfig& config, Rng& rng);

// --- forward pieces -------------------------------------------------------

// Per-frame two-layer map F -> D with a tanh hidden layer.
Matrix encode(const Matrix& frames, const ToyModelParams& params);  // T_f x D

// Arithmetic mean over the time axis. Works on any T x D matrix.
Matrix mean_pool(const Matrix& frames);  // 1 x D

// Learned-query multi-head attention over frames: per head, softmax scores
// against a trained query select a convex combination of value projections;
// head outputs are concatenated and linearly projected back to D. Optional
// alpha_out receives the heads x T_f attention weights.
Matrix attention_pool(const Matrix& frames, const ToyModelParams& params,
                      Matrix* alpha_out = nullptr);  // 1 x D

// encode -> pool as configured.
Matrix audio_embedding(const FeatureClip& clip, const ToyModelParams& params);  // 1 x D

// encode -> pool -> linear classification head.
Matrix forward_mtc(const FeatureClip& clip, const ToyModelParams& params);  // 1 x K

// Parallel-decoding readout: position t reads the pooled embedding through
// its learned query (elementwise) and a shared linear map, so every
// position is conditioned solely on the audio embedding.
Matrix forward_seq(const FeatureClip& clip, const ToyModelParams& params,
                   int t_len);  // t_len x V

// --- training -------------------------------------------------------------

enum class Objective { mtc, par, contrastive, mtl };

Objective objective_from_string(const std::string& name);
const char* to_string(Objective objective);

struct TrainConfig {
  int steps = 2000;
  int batch = 32;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
  Objective objective = Objective::mtc;
  double lambda = 1.0;  // mtl weight on the generative term
  double tau = 0.07;    // contrastive temperature
  int map_every = 0;    // 0 = evaluate mAP only at the final step

  void validate() const;
};

struct BatchLoss {
  double loss = 0.0;
  ParamMap grads;
};

// Loss and parameter gradients for one batch, with backprop chained by hand
// through head, pooling and encoder. Exposed for the gradient-check tests.
BatchLoss batch_loss_and_grads(const std::vector<FeatureClip>& dataset,
                               const std::vector<int>& batch_indices,
                               const ToyModelParams& params, Objective objective,
                               double lambda, double tau);

// Deterministic full-dataset loss in consecutive batches of `batch`,
// weighted by batch size.
double evaluate_objective(const std::vector<FeatureClip>& dataset, const ToyModelParams& params,
                          Objective objective, double lambda, double tau, int batch);

struct TraceRow {
  int step = 0;
  double loss = 0.0;
  std::optional<double> map;
};

struct TrainResult {
  ToyModelParams params;
  std::vector<TraceRow> trace;
  std::optional<double> final_map;
};

// Plain single-threaded SGD. Fully deterministic given the seed; a
// non-finite loss aborts with the offending step index.
TrainResult train_toy(const std::vector<FeatureClip>& dataset, const ToyModelConfig& model,
                      const TrainConfig& config);

// --- evaluation -----------------------------------------------------------

struct MapResult {
  double value = 0.0;
  std::vector<int> excluded_classes;  // classes with no positive example
};

// Macro-averaged average precision over classes with at least one positive.
// Throws when no class has a positive.
MapResult eval_map(const Matrix& scores, const Matrix& labels);

// Scores and multi-hot labels for the whole dataset under the current
// parameters (used for mAP reporting).
std::pair<Matrix, Matrix> score_dataset(const std::vector<FeatureClip>& dataset,
                                        const ToyModelParams& params);

// --- persistence ----------------------------------------------------------

void save_checkpoint(const ToyModelParams& params, const std::string& path);
ToyModelParams load_checkpoint(const std::string& path);

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

}  // namespace uts
