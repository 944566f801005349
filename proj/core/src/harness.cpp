// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include "textact/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "textact/random.hpp"

namespace textact {
namespace {

using json = nlohmann::json;

constexpr int kDefaultHorizon = 8;
constexpr int kDefaultResolution = 1000;

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string demos_key(const RunConfig& cfg) {
  if (!cfg.policy.demos_path.empty()) return "file:" + cfg.policy.demos_path;
  std::ostringstream os;
  os << cfg.env.name << '|' << cfg.env.success_radius << '|' << cfg.env.step_limit << '|'
     << cfg.policy.demo_count << '|' << cfg.policy.demo_seed;
  return os.str();
}

std::vector<Episode> load_or_generate_demos(const RunConfig& cfg) {
  if (!cfg.policy.demos_path.empty()) return read_episodes(cfg.policy.demos_path);
  return generate_demos(cfg.env, cfg.policy.demo_count, cfg.policy.demo_seed);
}

std::shared_ptr<const NearestNeighborModel> fit_model(const std::vector<Episode>& demos,
                                                      const CodecConfig& codec) {
  return std::make_shared<const NearestNeighborModel>(NearestNeighborModel::fit(demos, codec));
}

}  // namespace

std::string_view to_string(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::Oracle: return "oracle";
    case PolicyKind::NearestNeighbor: return "nn";
    case PolicyKind::Remote: return "remote";
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(std::string_view name) {
  if (name == "oracle") return PolicyKind::Oracle;
  if (name == "nn") return PolicyKind::NearestNeighbor;
  if (name == "remote") return PolicyKind::Remote;
  throw std::invalid_argument("unknown policy kind '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  codec.validate();
  if (codec.dims != env_action_dims(env.name)) {
    throw std::invalid_argument("codec dims do not match environment '" + env.name + "'");
  }
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  if (ensemble) {
    if (ensemble->horizon != codec.horizon) {
      throw std::invalid_argument("ensemble horizon must equal codec horizon");
    }
    try {
      ensemble->validate();
    } catch (const EnsembleError& e) {
      throw std::invalid_argument(e.what());
    }
  }
  if (!(mask_p >= 0.0 && mask_p <= 1.0)) throw std::invalid_argument("mask_p must be in [0, 1]");
  policy.corruption.validate();
  if (policy.kind == PolicyKind::NearestNeighbor && policy.demos_path.empty() && policy.demo_count < 1) {
    throw std::invalid_argument("demo_count must be >= 1");
  }
}

// ---- config json --------------------------------------------------------------

json run_config_to_json(const RunConfig& cfg) {
  json bounds = json::array();
  for (const auto& b : cfg.codec.bounds) bounds.push_back({b.lo, b.hi});
  json doc = {
      {"id", cfg.id},
      {"env", {{"name", cfg.env.name}, {"success_radius", cfg.env.success_radius},
               {"step_limit", cfg.env.step_limit}}},
      {"policy",
       {{"kind", to_string(cfg.policy.kind)},
        {"demos_path", cfg.policy.demos_path},
        {"demo_count", cfg.policy.demo_count},
        {"demo_seed", cfg.policy.demo_seed},
        {"corruption",
         {{"drop_token_prob", cfg.policy.corruption.drop_token_prob},
          {"perturb_digit_prob", cfg.policy.corruption.perturb_digit_prob},
          {"garbage_prob", cfg.policy.corruption.garbage_prob},
          {"seed", cfg.policy.corruption.seed}}},
        {"remote",
         {{"base_url", cfg.policy.remote.base_url},
          {"model", cfg.policy.remote.model},
          {"timeout_ms", cfg.policy.remote.timeout_ms},
          {"max_tokens", cfg.policy.remote.max_tokens},
          {"temperature", cfg.policy.remote.temperature}}}}},
      {"codec", {{"horizon", cfg.codec.horizon}, {"resolution", cfg.codec.resolution},
                 {"bounds", bounds}}},
      {"ensemble_n", cfg.ensemble ? json(cfg.ensemble->n) : json(nullptr)},
      {"mask_p", cfg.mask_p},
      {"layout", to_string(cfg.layout)},
      {"episodes", cfg.episodes},
      {"seed", cfg.seed},
  };
  if (cfg.min_success_rate) doc["min_success_rate"] = *cfg.min_success_rate;
  if (cfg.max_parse_fail_rate) doc["max_parse_fail_rate"] = *cfg.max_parse_fail_rate;
  return doc;
}

RunConfig run_config_from_json(const json& doc) {
  RunConfig cfg;
  try {
    cfg.id = doc.value("id", cfg.id);
    if (doc.contains("env")) {
      const auto& e = doc.at("env");
      if (e.is_string()) {
        cfg.env.name = e.get<std::string>();
      } else {
        cfg.env.name = e.value("name", cfg.env.name);
        cfg.env.success_radius = e.value("success_radius", cfg.env.success_radius);
        cfg.env.step_limit = e.value("step_limit", cfg.env.step_limit);
      }
    }
    if (doc.contains("policy")) {
      const auto& p = doc.at("policy");
      if (p.is_string()) {
        cfg.policy.kind = policy_kind_from_string(p.get<std::string>());
      } else {
        cfg.policy.kind = policy_kind_from_string(p.value("kind", std::string("oracle")));
        cfg.policy.demos_path = p.value("demos_path", cfg.policy.demos_path);
        cfg.policy.demo_count = p.value("demo_count", cfg.policy.demo_count);
        cfg.policy.demo_seed = p.value("demo_seed", cfg.policy.demo_seed);
        if (p.contains("corruption")) {
          const auto& c = p.at("corruption");
          auto& out = cfg.policy.corruption;
          out.drop_token_prob = c.value("drop_token_prob", out.drop_token_prob);
          out.perturb_digit_prob = c.value("perturb_digit_prob", out.perturb_digit_prob);
          out.garbage_prob = c.value("garbage_prob", out.garbage_prob);
          out.seed = c.value("seed", out.seed);
        }
        if (p.contains("remote")) {
          const auto& r = p.at("remote");
          auto& out = cfg.policy.remote;
          out.base_url = r.value("base_url", out.base_url);
          out.model = r.value("model", out.model);
          out.timeout_ms = r.value("timeout_ms", out.timeout_ms);
          out.max_tokens = r.value("max_tokens", out.max_tokens);
          out.temperature = r.value("temperature", out.temperature);
        }
      }
    }

    int horizon = kDefaultHorizon;
    int resolution = kDefaultResolution;
    std::vector<Bounds> bounds;
    if (doc.contains("codec")) {
      const auto& c = doc.at("codec");
      horizon = c.value("horizon", horizon);
      resolution = c.value("resolution", resolution);
      if (c.contains("bounds")) {
        for (const auto& pair : c.at("bounds")) bounds.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
      }
    }
    cfg.codec.horizon = horizon;
    cfg.codec.resolution = resolution;
    cfg.codec.dims = env_action_dims(cfg.env.name);
    cfg.codec.bounds = bounds.empty() ? env_action_bounds(cfg.env.name) : bounds;

    if (doc.contains("ensemble_n") && !doc.at("ensemble_n").is_null()) {
      cfg.ensemble = EnsembleConfig{doc.at("ensemble_n").get<int>(), horizon};
    }
    cfg.mask_p = doc.value("mask_p", cfg.mask_p);
    if (doc.contains("layout")) cfg.layout = image_layout_from_string(doc.at("layout").get<std::string>());
    cfg.episodes = doc.value("episodes", cfg.episodes);
    cfg.seed = doc.value("seed", cfg.seed);
    if (doc.contains("min_success_rate")) cfg.min_success_rate = doc.at("min_success_rate").get<double>();
    if (doc.contains("max_parse_fail_rate")) {
      cfg.max_parse_fail_rate = doc.at("max_parse_fail_rate").get<double>();
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed run config: ") + e.what());
  }
  return cfg;
}

// ---- policies -----------------------------------------------------------------

PolicyProvider::PolicyProvider(const RunConfig& cfg) : cfg_(cfg) {
  if (cfg_.policy.kind == PolicyKind::NearestNeighbor) {
    model_ = fit_model(load_or_generate_demos(cfg_), cfg_.codec);
  }
}

PolicyProvider::PolicyProvider(const RunConfig& cfg, std::shared_ptr<const NearestNeighborModel> model)
    : cfg_(cfg), model_(std::move(model)) {
  if (cfg_.policy.kind == PolicyKind::NearestNeighbor && !model_) {
    throw std::invalid_argument("nearest-neighbor policy needs a fitted model");
  }
}

std::unique_ptr<Policy> PolicyProvider::make() const {
  std::unique_ptr<Policy> policy;
  switch (cfg_.policy.kind) {
    case PolicyKind::Oracle: policy = std::make_unique<ScriptedPolicy>(cfg_.env, cfg_.codec); break;
    case PolicyKind::NearestNeighbor: policy = std::make_unique<NearestNeighborPolicy>(model_); break;
    case PolicyKind::Remote:
      policy = std::make_unique<RemotePolicy>(cfg_.policy.remote, cfg_.codec, cfg_.layout);
      break;
  }
  if (cfg_.policy.corruption.active()) {
    policy = std::make_unique<CorruptedPolicy>(std::move(policy), cfg_.policy.corruption);
  }
  return policy;
}

// ---- episodes -----------------------------------------------------------------

std::uint64_t episode_seed(std::uint64_t run_seed, int index) {
  return mix_seed(run_seed, static_cast<std::uint64_t>(index));
}

double compute_jitter(std::span<const std::vector<double>> actions) {
  if (actions.size() < 2) throw std::invalid_argument("jitter needs at least two actions");
  double total = 0.0;
  for (std::size_t t = 1; t < actions.size(); ++t) {
    if (actions[t].size() != actions[t - 1].size()) {
      throw std::invalid_argument("jitter: action sizes differ");
    }
    double sq = 0.0;
    for (std::size_t d = 0; d < actions[t].size(); ++d) {
      const double diff = actions[t][d] - actions[t - 1][d];
      sq += diff * diff;
    }
    total += sq;
  }
  return total / static_cast<double>(actions.size() - 1);
}

EpisodeResult run_episode(const RunConfig& cfg, Policy& policy, std::uint64_t seed) {
  auto env = make_environment(cfg.env);
  env->reset(seed);
  policy.begin_episode(seed);

  EnsembleBuffer buffer(cfg.ensemble.value_or(EnsembleConfig{1, cfg.codec.horizon}));
  const std::string instruction(env->instruction());
  std::vector<double> held(static_cast<std::size_t>(cfg.codec.dims), 0.0);
  std::vector<std::vector<double>> executed;

  EpisodeResult result;
  double latency_total = 0.0;
  for (std::int64_t t = 0;; ++t) {
    Observation obs{env->observation(), {}, t};
    if (policy.wants_images()) obs.images = env->render();

    StepRecord rec;
    rec.t = t;
    rec.state = obs.state;
    rec.parse_ok = false;
    try {
      PolicyOutput out = policy.act(obs, instruction);
      latency_total += out.latency_ms;
      rec.raw_text = std::move(out.raw_text);
      const ParseResult parsed = parse_text(rec.raw_text, cfg.codec);
      if (parsed) {
        rec.parse_ok = true;
        rec.clamped = parsed.chunk().clamped;
        buffer.push(dequantize(parsed.chunk(), cfg.codec), t);
      }
    } catch (const RemoteError&) {
      // Backend unavailable counts as an unusable reply.
    }

    if (rec.parse_ok) {
      rec.action = buffer.current_action(t);
      if (rec.clamped) ++result.clamp_events;
    } else {
      ++result.parse_failures;
      rec.action = held;
    }
    held = rec.action;

    const StepOutcome outcome = env->step(rec.action);
    executed.push_back(rec.action);
    result.trajectory.push_back(std::move(rec));
    if (outcome.done) {
      result.success = outcome.success;
      break;
    }
  }
  result.steps = static_cast<int>(result.trajectory.size());
  result.jitter = executed.size() >= 2 ? compute_jitter(executed) : 0.0;
  result.latency_ms = latency_total / result.steps;
  return result;
}

// ---- suites -------------------------------------------------------------------

bool SuiteReport::all_assertions_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const ConfigReport& r) { return r.assertions_ok; });
}

std::string SuiteReport::to_csv(bool include_timing, bool extra_columns) const {
  std::ostringstream os;
  os << "config_id,success_rate,jitter,parse_fail_rate,clamp_rate,latency_ms";
  if (extra_columns) os << ",delta_success";
  os << '\n';
  for (const auto& r : rows) {
    os << r.config_id << ',' << format_number(r.success_rate) << ',' << format_number(r.jitter) << ','
       << format_number(r.parse_fail_rate) << ',' << format_number(r.clamp_rate) << ','
       << format_number(include_timing ? r.latency_ms : 0.0);
    if (extra_columns) os << ',' << format_number(r.delta_success);
    os << '\n';
  }
  return os.str();
}

json SuiteReport::to_json(bool include_timing) const {
  json rows_json = json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"config_id", r.config_id},
                         {"episodes", r.episodes},
                         {"success_rate", r.success_rate},
                         {"jitter", r.jitter},
                         {"parse_fail_rate", r.parse_fail_rate},
                         {"clamp_rate", r.clamp_rate},
                         {"latency_ms", include_timing ? r.latency_ms : 0.0},
                         {"mean_steps", r.mean_steps},
                         {"delta_success", r.delta_success},
                         {"delta_jitter", r.delta_jitter},
                         {"assertions_ok", r.assertions_ok},
                         {"failed_assertions", r.failed_assertions},
                         {"config", r.config}});
  }
  return {{"baseline", rows.empty() ? json(nullptr) : json(rows.at(baseline).config_id)},
          {"rows", rows_json}};
}

SuiteReport run_suite(const std::vector<RunConfig>& grid, const SuiteOptions& options) {
  if (grid.empty()) throw std::invalid_argument("run_suite: empty grid");
  if (options.baseline >= grid.size()) throw std::invalid_argument("run_suite: baseline out of range");

  std::map<std::string, std::vector<Episode>> demo_cache;
  std::map<std::string, std::shared_ptr<const NearestNeighborModel>> model_cache;

  SuiteReport report;
  report.baseline = options.baseline;
  for (const auto& cfg : grid) {
    cfg.validate();

    std::shared_ptr<const NearestNeighborModel> model;
    if (cfg.policy.kind == PolicyKind::NearestNeighbor) {
      const std::string dkey = demos_key(cfg);
      auto demos = demo_cache.find(dkey);
      if (demos == demo_cache.end()) demos = demo_cache.emplace(dkey, load_or_generate_demos(cfg)).first;
      const std::string mkey = dkey + '#' + codec_config_to_json(cfg.codec);
      auto cached = model_cache.find(mkey);
      if (cached == model_cache.end()) cached = model_cache.emplace(mkey, fit_model(demos->second, cfg.codec)).first;
      model = cached->second;
    }
    const PolicyProvider provider(cfg, model);

    std::vector<EpisodeResult> results(static_cast<std::size_t>(cfg.episodes));
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
      try {
        auto policy = provider.make();
        for (int i = next++; i < cfg.episodes; i = next++) {
          EpisodeResult r = run_episode(cfg, *policy, episode_seed(cfg.seed, i));
          r.trajectory.clear();
          results[static_cast<std::size_t>(i)] = std::move(r);
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = cfg.episodes;
      }
    };
    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.episodes));
    if (threads <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);

    ConfigReport row;
    row.config_id = cfg.id;
    row.episodes = cfg.episodes;
    row.config = run_config_to_json(cfg);
    long long steps = 0, failures = 0, clamps = 0, successes = 0;
    double jitter = 0.0, latency = 0.0;
    for (const auto& r : results) {
      steps += r.steps;
      failures += r.parse_failures;
      clamps += r.clamp_events;
      successes += r.success ? 1 : 0;
      jitter += r.jitter;
      latency += r.latency_ms * r.steps;
    }
    row.success_rate = static_cast<double>(successes) / cfg.episodes;
    row.jitter = jitter / cfg.episodes;
    row.parse_fail_rate = static_cast<double>(failures) / static_cast<double>(steps);
    row.clamp_rate = static_cast<double>(clamps) / static_cast<double>(steps);
    row.latency_ms = latency / static_cast<double>(steps);
    row.mean_steps = static_cast<double>(steps) / cfg.episodes;

    if (cfg.min_success_rate && row.success_rate < *cfg.min_success_rate) {
      row.failed_assertions.push_back("success_rate " + format_number(row.success_rate) + " < " +
                                      format_number(*cfg.min_success_rate));
    }
    if (cfg.max_parse_fail_rate && row.parse_fail_rate > *cfg.max_parse_fail_rate) {
      row.failed_assertions.push_back("parse_fail_rate " + format_number(row.parse_fail_rate) + " > " +
                                      format_number(*cfg.max_parse_fail_rate));
    }
    row.assertions_ok = row.failed_assertions.empty();
    report.rows.push_back(std::move(row));
  }

  const ConfigReport& base = report.rows[report.baseline];
  const double base_success = base.success_rate;
  const double base_jitter = base.jitter;
  for (auto& r : report.rows) {
    r.delta_success = r.success_rate - base_success;
    r.delta_jitter = r.jitter - base_jitter;
  }
  return report;
}

// ---- ablation -----------------------------------------------------------------

void AblationAxes::validate(int horizon) const {
  if (ensemble_n < 0 || ensemble_n > horizon) {
    throw std::invalid_argument("ablation ensemble_n must be in [1, H] (0 for H)");
  }
  if (!(mask_p >= 0.0 && mask_p <= 1.0)) throw std::invalid_argument("ablation mask_p must be in [0, 1]");
  for (int b : {resolution, high_resolution, low_resolution}) {
    if (b < 2) throw std::invalid_argument("ablation resolutions must be >= 2");
  }
}

std::vector<RunConfig> ablation_grid(const RunConfig& base, const AblationAxes& axes) {
  axes.validate(base.codec.horizon);
  RunConfig row0 = base;
  row0.id = "row0_baseline";
  row0.ensemble = EnsembleConfig{axes.ensemble_n ? axes.ensemble_n : base.codec.horizon, base.codec.horizon};
  row0.mask_p = axes.mask_p;
  row0.layout = ImageLayout::Tiled;
  row0.codec.resolution = axes.resolution;

  std::vector<RunConfig> grid(6, row0);
  grid[1].id = "row1_no_ensemble";
  grid[1].ensemble.reset();
  grid[2].id = "row2_no_masking";
  grid[2].mask_p = 0.0;
  grid[3].id = "row3_res" + std::to_string(axes.high_resolution);
  grid[3].codec.resolution = axes.high_resolution;
  grid[4].id = "row4_res" + std::to_string(axes.low_resolution);
  grid[4].codec.resolution = axes.low_resolution;
  grid[5].id = "row5_untiled";
  grid[5].layout = ImageLayout::Separate;
  return grid;
}

}  // namespace textact
