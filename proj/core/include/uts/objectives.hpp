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
#include <vector>

#include "uts/matrix.hpp"

namespace uts {

// Scalar loss plus analytic gradients keyed by input name. Every kernel in
// this header is pure, reentrant and bit-deterministic; gradients are
// verified against central finite differences in the test suite.
struct LossResult {
  double loss = 0.0;
  std::map<std::string, Matrix> grads;
};

// A batch of audio or text embeddings, one row per sample. Rows need not be
// normalized; cosine similarity is computed internally.
struct EmbeddingBatch {
  Matrix rows;  // M x D
};

// Per-position vocabulary logits with their target token ids.
struct SequenceLogits {
  Matrix logits;             // T x V
  std::vector<int> targets;  // length T, each in [0, V)
};

// Multi-label binary cross-entropy from logits: sum over classes, mean over
// samples. Computed in the numerically stable logits form; identical to the
// probability form but safe for large |z|.
//   grads["logits"][i][j] = (sigmoid(z_ij) - y_ij) / M
LossResult bce_multilabel(const Matrix& logits, const Matrix& targets);

// Symmetric InfoNCE over matched (audio, text) pairs with temperature tau:
// the mean of the audio->text and text->audio log-softmax terms with a
// 1/(2M) prefactor. Similarities are cosine, so the loss is invariant to
// positive per-row rescaling of either matrix. Zero-norm rows throw.
//   grads["audio"], grads["text"]: gradients through the normalization
LossResult infonce_symmetric(const EmbeddingBatch& audio, const EmbeddingBatch& text, double tau);

// Token-level negative log-likelihood summed over positions, no length
// normalization. Serves both autoregressive and parallel decoding: the two
// differ only in how the caller produced the logits.
//   grads["logits"] = softmax - one_hot(target), rows independent
LossResult nll_sequence(const SequenceLogits& batch);

// Seeded batch split for mixed captioning: exactly round(ar_fraction * n)
// samples are assigned to the autoregressive route (true), the rest to the
// parallel route.
std::vector<bool> assign_ar_par(int batch_size, double ar_fraction, std::uint64_t seed);

// Sum of per-sample AR losses over the AR-assigned fraction plus PAR losses
// over the rest. Validates that the caller's split matches ar_fraction.
double mixed_caption_loss(const std::vector<double>& ar_losses,
                          const std::vector<double>& par_losses, double ar_fraction);

// Weighted multi-task combination: loss = l_mtc + lambda * l_gen, with
// gradient maps merged linearly under the same weights. Shared keys must
// shape-match.
LossResult mtl_combine(double l_mtc, const std::map<std::string, Matrix>& grads_mtc,
                       double l_gen, const std::map<std::string, Matrix>& grads_gen,
                       double lambda);

// Shared numeric helpers (also used by the toy model).
namespace detail {
double sigmoid(double z);
// log(sum_j exp(v_j)) over a contiguous row, max-shifted.
double log_sum_exp(const double* v, int n);
void softmax_inplace(double* v, int n);
}  // namespace detail

}  // namespace uts
