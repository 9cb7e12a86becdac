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

#include <benchmark/benchmark.h>

#include "uts/matrix.hpp"
#include "uts/objectives.hpp"
#include "uts/rng.hpp"

namespace {

uts::Matrix gaussian(int rows, int cols, uts::Rng& rng) {
  uts::Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

void BM_BceMultilabel(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  uts::Rng rng(1);
  const uts::Matrix logits = gaussian(m, k, rng);
  uts::Matrix targets(m, k);
  for (double& v : targets.data()) v = rng.uniform() < 0.01 ? 1.0 : 0.0;
  for (auto _ : state) {
    auto result = uts::bce_multilabel(logits, targets);
    benchmark::DoNotOptimize(result.loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m) * k);
}
BENCHMARK(BM_BceMultilabel)->Args({32, 1500})->Args({64, 3000});

void BM_InfonceSymmetric(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  uts::Rng rng(2);
  const uts::EmbeddingBatch audio{gaussian(m, d, rng)};
  const uts::EmbeddingBatch text{gaussian(m, d, rng)};
  for (auto _ : state) {
    auto result = uts::infonce_symmetric(audio, text, 0.07);
    benchmark::DoNotOptimize(result.loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m) * m);
}
BENCHMARK(BM_InfonceSymmetric)->Args({64, 256})->Args({256, 768});

void BM_NllSequence(benchmark::State& state) {
  const int t = static_cast<int>(state.range(0));
  const int v = static_cast<int>(state.range(1));
  uts::Rng rng(3);
  uts::SequenceLogits seq;
  seq.logits = gaussian(t, v, rng);
  for (int i = 0; i < t; ++i) seq.targets.push_back(rng.uniform_int(0, v - 1));
  for (auto _ : state) {
    auto result = uts::nll_sequence(seq);
    benchmark::DoNotOptimize(result.loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t) * v);
}
BENCHMARK(BM_NllSequence)->Args({16, 1500})->Args({16, 50000});

}  // namespace

BENCHMARK_MAIN();
