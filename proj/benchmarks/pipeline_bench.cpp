// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "textact/augmentation.hpp"
#include "textact/harness.hpp"
#include "textact/prompting.hpp"
#include "textact/random.hpp"

namespace {

using namespace textact;

void BM_MaskActionText(benchmark::State& state) {
  Rng rng(5);
  std::string text;
  for (int i = 0; i < 56; ++i) text += std::to_string(rng.below(1001)) + " ";
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(mask_action_text(text, {0.3, '#', seed++}));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_MaskActionText);

void BM_BuildSystemPrompt(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_system_prompt(8, 7, 1000));
}
BENCHMARK(BM_BuildSystemPrompt);

void BM_OracleEpisode(benchmark::State& state) {
  RunConfig cfg;
  cfg.env.name = state.range(0) == 0 ? "pointmass" : "arm";
  cfg.codec = default_codec(cfg.env.name, 8, 1000);
  cfg.ensemble = EnsembleConfig{8, 8};
  auto policy = PolicyProvider(cfg).make();
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  for (auto _ : state) steps += run_episode(cfg, *policy, seed++).steps;
  state.counters["steps/s"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_OracleEpisode)->Arg(0)->Arg(1);

}  // namespace
