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

#include <string>
#include <vector>

#include "uts/rng.hpp"
#include "uts/tags.hpp"
#include "uts/toy_model.hpp"
#include "uts/vocab.hpp"

namespace {

std::vector<uts::TagList> synthetic_lists(int records, int pool, uts::Rng& rng) {
  std::vector<uts::TagList> lists;
  lists.reserve(records);
  for (int i = 0; i < records; ++i) {
    std::vector<std::string> tags;
    const int n = rng.uniform_int(3, 10);
    for (int j = 0; j < n; ++j) {
      // Zipf-ish draw biased toward low tag ids.
      const int id = static_cast<int>(pool * rng.uniform() * rng.uniform());
      tags.push_back("tag" + std::to_string(id));
    }
    std::sort(tags.begin(), tags.end());
    tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
    lists.push_back(uts::TagList::from_validated(tags));
  }
  return lists;
}

void BM_AccumulateDf(benchmark::State& state) {
  uts::Rng rng(4);
  const auto lists = synthetic_lists(static_cast<int>(state.range(0)), 20000, rng);
  for (auto _ : state) {
    auto table = uts::accumulate_df(lists);
    benchmark::DoNotOptimize(table.n_records);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AccumulateDf)->Arg(10000)->Arg(100000);

void BM_SelectTopK(benchmark::State& state) {
  uts::Rng rng(5);
  const auto lists = synthetic_lists(100000, 20000, rng);
  const uts::DfTable table = uts::accumulate_df(lists);
  for (auto _ : state) {
    auto vocab = uts::select_top_k(table, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(vocab.k());
  }
}
BENCHMARK(BM_SelectTopK)->Arg(800)->Arg(1500)->Arg(3000);

void BM_AttentionPool(benchmark::State& state) {
  uts::ToyModelConfig config;
  config.feat_dim = 80;
  config.hidden_dim = 64;
  config.embed_dim = 64;
  config.pool = uts::PoolKind::attention;
  config.heads = static_cast<int>(state.range(0));
  config.num_tags = 8;
  uts::Rng rng(6);
  const uts::ToyModelParams params = uts::init_params(config, rng);
  uts::Matrix frames(128, config.embed_dim);
  for (double& v : frames.data()) v = rng.normal();
  for (auto _ : state) {
    auto pooled = uts::attention_pool(frames, params);
    benchmark::DoNotOptimize(pooled.data());
  }
}
BENCHMARK(BM_AttentionPool)->Arg(1)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
