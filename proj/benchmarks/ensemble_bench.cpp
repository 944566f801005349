// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "textact/ensemble.hpp"
#include "textact/random.hpp"

namespace {

using namespace textact;

// One control step: push a fresh chunk, read the ensembled action.
void BM_EnsembleStep(benchmark::State& state) {
  const int h = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  EnsembleBuffer buf({n, h});
  Rng rng(1);
  ActionChunk chunk(h, 7);
  for (auto& v : chunk.flat()) v = rng.uniform(-1.0, 1.0);
  std::int64_t t = 0;
  for (auto _ : state) {
    buf.push(chunk, t);
    benchmark::DoNotOptimize(buf.current_action(t));
    ++t;
  }
}
BENCHMARK(BM_EnsembleStep)->Args({8, 1})->Args({8, 8})->Args({16, 16});

}  // namespace
