// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textact/codec.hpp"
#include "textact/ensemble.hpp"
#include "textact/episode.hpp"
#include "textact/policy.hpp"
#include "textact/prompting.hpp"
#include "textact/remote_client.hpp"
#include "textact/simenv.hpp"

namespace textact {

enum class PolicyKind { Oracle, NearestNeighbor, Remote };

std::string_view to_string(PolicyKind kind) noexcept;
PolicyKind policy_kind_from_string(std::string_view name);

struct PolicySpec {
  PolicyKind kind = PolicyKind::Oracle;
  CorruptionConfig corruption;
  /// Nearest-neighbor training data: read from demos_path when set,
  /// otherwise generated with (demo_count, demo_seed).
  std::string demos_path;
  int demo_count = 100;
  std::uint64_t demo_seed = 1;
  RemoteEndpointConfig remote;
};

/// One cell of an evaluation grid.
///
/// A missing ensemble means plain chunking (n = 1). On a parse failure the
/// previously executed action is repeated.
struct RunConfig {
  std::string id = "baseline";
  EnvConfig env;
  PolicySpec policy;
  CodecConfig codec;
  std::optional<EnsembleConfig> ensemble;
  /// Masking probability used when building training data. Recorded in the
  /// report; the built-in policies do not condition on a text prefix.
  double mask_p = 0.0;
  ImageLayout layout = ImageLayout::Tiled;
  int episodes = 50;
  std::uint64_t seed = 0;

  // Optional pass/fail gates evaluated by run_suite.
  std::optional<double> min_success_rate;
  std::optional<double> max_parse_fail_rate;

  void validate() const;
};

/// RunConfig <-> JSON. Missing keys take defaults; a missing "codec" section
/// uses the environment's action bounds with H=8, B=1000.
nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& doc);

struct EpisodeResult {
  bool success = false;
  int steps = 0;
  int parse_failures = 0;
  int clamp_events = 0;
  double jitter = 0.0;
  double latency_ms = 0.0;  // mean policy latency per step
  std::vector<StepRecord> trajectory;
};

/// Builds policies for a RunConfig. Demonstrations and the fitted
/// nearest-neighbor model are created once and shared read-only.
class PolicyProvider {
 public:
  explicit PolicyProvider(const RunConfig& cfg);
  PolicyProvider(const RunConfig& cfg, std::shared_ptr<const NearestNeighborModel> model);

  std::unique_ptr<Policy> make() const;

  const std::shared_ptr<const NearestNeighborModel>& model() const noexcept { return model_; }

 private:
  RunConfig cfg_;
  std::shared_ptr<const NearestNeighborModel> model_;
};

/// Closed loop: observe, act, parse, dequantize, ensemble, step. Parse
/// failures (and backend errors) are counted and fall back to holding the
/// previous action; they never abort the episode.
EpisodeResult run_episode(const RunConfig& cfg, Policy& policy, std::uint64_t episode_seed);

/// Seed of episode i of a config; shared across configs with the same seed,
/// so grid cells are compared on paired episodes.
std::uint64_t episode_seed(std::uint64_t run_seed, int index);

/// Mean over t of ||a_t - a_{t-1}||^2. Throws std::invalid_argument with
/// fewer than two actions.
double compute_jitter(std::span<const std::vector<double>> actions);

struct ConfigReport {
  std::string config_id;
  int episodes = 0;
  double success_rate = 0.0;
  double jitter = 0.0;
  double parse_fail_rate = 0.0;
  double clamp_rate = 0.0;
  double latency_ms = 0.0;
  double mean_steps = 0.0;
  // Differences against the baseline row.
  double delta_success = 0.0;
  double delta_jitter = 0.0;
  bool assertions_ok = true;
  std::vector<std::string> failed_assertions;
  nlohmann::json config;
};

struct SuiteReport {
  std::vector<ConfigReport> rows;
  std::size_t baseline = 0;

  bool all_assertions_ok() const;

  /// Columns: config_id, success_rate, jitter, parse_fail_rate, clamp_rate,
  /// latency_ms. extra_columns appends delta_success. Wall-clock latency is
  /// written as 0 when include_timing is false, making the file reproducible.
  std::string to_csv(bool include_timing = true, bool extra_columns = false) const;
  nlohmann::json to_json(bool include_timing = true) const;
};

struct SuiteOptions {
  std::size_t baseline = 0;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Evaluates every config over its episodes and fills deltas against the
/// baseline row. Throws std::invalid_argument on an empty grid.
SuiteReport run_suite(const std::vector<RunConfig>& grid, const SuiteOptions& options = {});

/// Values along the four ablation axes.
struct AblationAxes {
  int ensemble_n = 0;  // 0 means n = H when ensembling is on
  double mask_p = 0.3;
  int resolution = 1000;
  int high_resolution = 4000;
  int low_resolution = 250;

  void validate(int horizon) const;
};

/// Six rows: 0 baseline (ensemble on, masking on, tiled, B=1000); 1 ensemble
/// off; 2 masking off; 3 high resolution; 4 low resolution; 5 separate images.
std::vector<RunConfig> ablation_grid(const RunConfig& base, const AblationAxes& axes = {});

}  // namespace textact
