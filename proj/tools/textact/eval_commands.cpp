// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

#include "common.hpp"
#include "textact/harness.hpp"

namespace textact::cli {
namespace {

using json = nlohmann::json;

// Command-line overrides for a RunConfig document. Unset fields keep the
// value from the config file.
struct RunFlags {
  std::string config;
  std::optional<std::string> id, env, policy, layout, demos, backend_url, model, api_key, bounds_file;
  std::optional<int> episodes, horizon, resolution, ensemble_n, demo_count, timeout_ms, step_limit;
  std::optional<std::uint64_t> seed, demo_seed, noise_seed;
  std::optional<double> mask_p, perturb_p, drop_p, garbage_p, min_success, max_parse_fail, success_radius;
  unsigned threads = 0;
  std::string out_dir = ".";
  bool no_timing = false;
};

// Ablation axes replace the ensemble, masking, resolution and layout flags.
void add_run_flags(CLI::App& sub, RunFlags& f, bool ablation) {
  sub.add_option("--config", f.config, "Run config JSON; flags override its fields")->check(CLI::ExistingFile);
  sub.add_option("--id", f.id, "Config id in the report");
  sub.add_option("--env", f.env, "Environment")->check(CLI::IsMember({"pointmass", "arm"}));
  sub.add_option("--success-radius", f.success_radius, "Goal radius (0 = environment default)");
  sub.add_option("--step-limit", f.step_limit, "Steps per episode");
  sub.add_option("--policy", f.policy, "Policy kind")->check(CLI::IsMember({"oracle", "nn", "remote"}));
  sub.add_option("--demos", f.demos, "Demonstrations JSONL for the nn policy");
  sub.add_option("--demo-count", f.demo_count, "Generated demonstrations when --demos is absent");
  sub.add_option("--demo-seed", f.demo_seed, "Seed for generated demonstrations");
  sub.add_option("--perturb-p", f.perturb_p, "Per-digit perturbation probability of the policy output");
  sub.add_option("--drop-p", f.drop_p, "Per-token drop probability of the policy output");
  sub.add_option("--garbage-p", f.garbage_p, "Probability of an unparseable policy reply");
  sub.add_option("--noise-seed", f.noise_seed, "Seed of the output corruption");
  sub.add_option("--backend-url", f.backend_url, "Chat-completion base URL for the remote policy");
  sub.add_option("--model", f.model, "Model name for the remote policy");
  sub.add_option("--timeout-ms", f.timeout_ms, "Remote request timeout");
  sub.add_option("--api-key", f.api_key, std::string("API key (default: $") + kApiKeyEnvVar + ")");
  sub.add_option("--horizon", f.horizon, "Chunk length H");
  sub.add_option("--bounds-file", f.bounds_file, "Codec config supplying the action bounds")->check(CLI::ExistingFile);
  sub.add_option("--episodes", f.episodes, "Episodes per config");
  sub.add_option("--seed", f.seed, "Run seed; episode seeds derive from it");
  sub.add_option("--min-success", f.min_success, "Fail unless success rate >= this");
  sub.add_option("--max-parse-fail", f.max_parse_fail, "Fail unless parse failure rate <= this");
  sub.add_option("--threads", f.threads, "Worker threads (0 = all cores)");
  sub.add_option("--out-dir", f.out_dir, "Directory for report files")->capture_default_str();
  sub.add_flag("--no-timing", f.no_timing, "Write latency as 0 so reruns are byte-identical");
  if (!ablation) {
    sub.add_option("--resolution", f.resolution, "Integer range B");
    sub.add_option("--ensemble-n", f.ensemble_n, "Ensemble size (0 = off)");
    sub.add_option("--mask-p", f.mask_p, "Mask probability recorded with the run");
    sub.add_option("--layout", f.layout, "Image layout")->check(CLI::IsMember({"tiled", "separate"}));
  }
}

json& object_at(json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_object()) {
    json replacement = json::object();
    if (doc.contains(key) && doc[key].is_string()) {
      replacement[std::string(key) == "env" ? "name" : "kind"] = doc[key];
    }
    doc[key] = replacement;
  }
  return doc[key];
}

void apply_flags(json& doc, const RunFlags& f) {
  if (f.id) doc["id"] = *f.id;
  if (f.env) object_at(doc, "env")["name"] = *f.env;
  if (f.success_radius) object_at(doc, "env")["success_radius"] = *f.success_radius;
  if (f.step_limit) object_at(doc, "env")["step_limit"] = *f.step_limit;

  if (f.policy) object_at(doc, "policy")["kind"] = *f.policy;
  if (f.demos) object_at(doc, "policy")["demos_path"] = *f.demos;
  if (f.demo_count) object_at(doc, "policy")["demo_count"] = *f.demo_count;
  if (f.demo_seed) object_at(doc, "policy")["demo_seed"] = *f.demo_seed;
  if (f.perturb_p || f.drop_p || f.garbage_p || f.noise_seed) {
    json& c = object_at(object_at(doc, "policy"), "corruption");
    if (f.perturb_p) c["perturb_digit_prob"] = *f.perturb_p;
    if (f.drop_p) c["drop_token_prob"] = *f.drop_p;
    if (f.garbage_p) c["garbage_prob"] = *f.garbage_p;
    if (f.noise_seed) c["seed"] = *f.noise_seed;
  }
  if (f.backend_url || f.model || f.timeout_ms) {
    json& r = object_at(object_at(doc, "policy"), "remote");
    if (f.backend_url) r["base_url"] = *f.backend_url;
    if (f.model) r["model"] = *f.model;
    if (f.timeout_ms) r["timeout_ms"] = *f.timeout_ms;
  }

  if (f.bounds_file) {
    const json file = read_json_file(*f.bounds_file);
    if (!file.contains("bounds")) throw UsageError(*f.bounds_file + " has no \"bounds\"");
    json& codec = object_at(doc, "codec");
    codec["bounds"] = file.at("bounds");
    if (file.contains("horizon")) codec["horizon"] = file.at("horizon");
    if (file.contains("resolution")) codec["resolution"] = file.at("resolution");
  }
  if (f.horizon) object_at(doc, "codec")["horizon"] = *f.horizon;
  if (f.resolution) object_at(doc, "codec")["resolution"] = *f.resolution;
  if (f.ensemble_n) doc["ensemble_n"] = *f.ensemble_n > 0 ? json(*f.ensemble_n) : json(nullptr);
  if (f.mask_p) doc["mask_p"] = *f.mask_p;
  if (f.layout) doc["layout"] = *f.layout;
  if (f.episodes) doc["episodes"] = *f.episodes;
  if (f.seed) doc["seed"] = *f.seed;
  if (f.min_success) doc["min_success_rate"] = *f.min_success;
  if (f.max_parse_fail) doc["max_parse_fail_rate"] = *f.max_parse_fail;
}

RunConfig to_run_config(json doc, const RunFlags& f) {
  apply_flags(doc, f);
  RunConfig cfg;
  try {
    cfg = run_config_from_json(doc);
    cfg.validate();
  } catch (const std::exception& e) {
    throw UsageError(std::string("invalid run config: ") + e.what());
  }
  if (f.api_key) {
    cfg.policy.remote.api_key = *f.api_key;
  } else if (const char* key = std::getenv(kApiKeyEnvVar)) {
    cfg.policy.remote.api_key = key;
  }
  if (cfg.policy.kind == PolicyKind::NearestNeighbor && !cfg.policy.demos_path.empty() &&
      !std::filesystem::exists(cfg.policy.demos_path)) {
    throw UsageError("demonstrations file not found: " + cfg.policy.demos_path);
  }
  return cfg;
}

// Run configs from the file (a single config, or {"runs": [...]} whose
// entries extend the shared top-level fields) with flags applied to each.
std::vector<RunConfig> load_runs(const RunFlags& f, std::size_t* baseline) {
  json doc = f.config.empty() ? json::object() : read_json_file(f.config);
  if (!doc.is_object()) throw UsageError("run config must be a JSON object");
  std::vector<RunConfig> runs;
  if (doc.contains("runs")) {
    json shared = doc;
    shared.erase("runs");
    shared.erase("baseline");
    if (!doc["runs"].is_array() || doc["runs"].empty()) throw UsageError("\"runs\" must be a non-empty list");
    for (const auto& entry : doc["runs"]) {
      json merged = shared;
      merged.merge_patch(entry);
      runs.push_back(to_run_config(merged, f));
    }
  } else {
    runs.push_back(to_run_config(doc, f));
  }
  if (baseline) {
    *baseline = doc.value("baseline", std::size_t{0});
    if (*baseline >= runs.size()) throw UsageError("baseline index out of range");
  }
  return runs;
}

void check_remote(const std::vector<RunConfig>& runs) {
  for (const auto& cfg : runs) {
    if (cfg.policy.kind == PolicyKind::Remote && !RemoteClient(cfg.policy.remote).reachable()) {
      throw std::runtime_error("remote backend not reachable at " + cfg.policy.remote.base_url);
    }
  }
}

int emit(const SuiteReport& report, const RunFlags& f, const std::string& stem, bool deltas) {
  std::filesystem::create_directories(f.out_dir);
  const auto dir = std::filesystem::path(f.out_dir);
  const std::string csv = report.to_csv(!f.no_timing, deltas);
  write_text_file((dir / (stem + ".csv")).string(), csv);
  write_text_file((dir / (stem + ".json")).string(), report.to_json(!f.no_timing).dump(2) + "\n");
  std::cout << csv;
  std::cout << "wrote " << (dir / (stem + ".csv")).string() << " and " << (dir / (stem + ".json")).string() << "\n";
  for (const auto& row : report.rows) {
    for (const auto& failure : row.failed_assertions) {
      std::cerr << "assertion failed [" << row.config_id << "]: " << failure << "\n";
    }
  }
  return report.all_assertions_ok() ? kExitOk : kExitFailure;
}

}  // namespace

void add_eval(CLI::App& app, std::vector<Command>& out) {
  auto f = std::make_shared<RunFlags>();
  auto* sub = app.add_subcommand("eval", "Evaluate one or more run configs in closed loop");
  add_run_flags(*sub, *f, false);
  out.push_back({sub, [f] {
                   std::size_t baseline = 0;
                   const auto runs = load_runs(*f, &baseline);
                   check_remote(runs);
                   SuiteOptions options;
                   options.baseline = baseline;
                   options.threads = f->threads;
                   return emit(run_suite(runs, options), *f, "report", runs.size() > 1);
                 }});
}

void add_ablate(CLI::App& app, std::vector<Command>& out) {
  auto f = std::make_shared<RunFlags>();
  auto axes = std::make_shared<AblationAxes>();
  auto* sub = app.add_subcommand("ablate", "Run the six-row ablation grid around a base config");
  add_run_flags(*sub, *f, true);
  sub->add_option("--ensemble-n", axes->ensemble_n, "Ensemble size of the ensembled rows (0 = H)")
      ->capture_default_str();
  sub->add_option("--mask-p", axes->mask_p, "Mask probability of the masked rows")->capture_default_str();
  sub->add_option("--resolution", axes->resolution, "Baseline resolution")->capture_default_str();
  sub->add_option("--high-resolution", axes->high_resolution, "High-resolution row")->capture_default_str();
  sub->add_option("--low-resolution", axes->low_resolution, "Low-resolution row")->capture_default_str();
  out.push_back({sub, [f, axes] {
                   const auto runs = load_runs(*f, nullptr);
                   if (runs.size() != 1) throw UsageError("ablate takes a single base config");
                   std::vector<RunConfig> grid;
                   try {
                     grid = ablation_grid(runs.front(), *axes);
                     for (const auto& cfg : grid) cfg.validate();
                   } catch (const std::exception& e) {
                     throw UsageError(std::string("invalid ablation axes: ") + e.what());
                   }
                   check_remote(grid);
                   SuiteOptions options;
                   options.threads = f->threads;
                   return emit(run_suite(grid, options), *f, "ablation", true);
                 }});
}

}  // namespace textact::cli
