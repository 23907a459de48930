/*
 * Copyright 2026 The cxrlt Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include <vector>

#include "cxrlt/metrics.hpp"
#include "cxrlt/random.hpp"

namespace cxrlt {
namespace {

struct Column {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
};

Column random_column(std::size_t n) {
  Rng rng(5);
  Column c;
  for (std::size_t i = 0; i < n; ++i) {
    c.labels.push_back(rng.bernoulli(0.1));
    c.scores.push_back(rng.uniform());
  }
  c.labels[0] = 1;
  c.labels[1] = 0;
  return c;
}

void BM_AveragePrecision(benchmark::State& state) {
  const Column c = random_column(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(average_precision(c.scores, c.labels));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AveragePrecision)->RangeMultiplier(10)->Range(100, 100000)->Complexity();

void BM_RocAuc(benchmark::State& state) {
  const Column c = random_column(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(c.scores, c.labels));
}
BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(100000);

void BM_Youden(benchmark::State& state) {
  const Column c = random_column(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(youden_threshold(c.scores, c.labels));
}
BENCHMARK(BM_Youden)->Arg(1000)->Arg(100000);

}  // namespace
}  // namespace cxrlt

BENCHMARK_MAIN();
