// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "common.hpp"
#include "textact/augmentation.hpp"
#include "textact/random.hpp"
#include "textact/simenv.hpp"

namespace textact::cli {
namespace {

using json = nlohmann::json;

const std::vector<std::string> kEnvNames = {"pointmass", "arm"};

std::vector<Episode> load_demos(const std::string& path) {
  try {
    auto demos = read_episodes(std::filesystem::path(path));
    if (demos.empty()) throw UsageError(path + " holds no episodes");
    return demos;
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

}  // namespace

// ---- gen-demos -----------------------------------------------------------------

void add_gen_demos(CLI::App& app, std::vector<Command>& out) {
  struct Options {
    std::string config;
    std::string env = "pointmass";
    int count = 100;
    std::uint64_t seed = 1;
    std::string path = "demos.jsonl";
    double success_radius = 0.0;
    int step_limit = kDefaultStepLimit;
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("gen-demos", "Generate successful scripted demonstrations as JSONL");
  add_config_option(*sub, o->config);
  sub->add_option("--env", o->env, "Environment")->check(CLI::IsMember(kEnvNames))->capture_default_str();
  sub->add_option("--count", o->count, "Number of successful episodes")->capture_default_str();
  sub->add_option("--seed", o->seed, "Base seed")->capture_default_str();
  sub->add_option("--out", o->path, "Output JSONL path")->capture_default_str();
  sub->add_option("--success-radius", o->success_radius, "Goal radius (0 = environment default)");
  sub->add_option("--step-limit", o->step_limit, "Steps per episode")->capture_default_str();

  out.push_back({sub, [o] {
                   if (o->count < 1) throw UsageError("--count must be >= 1");
                   if (o->step_limit < 1) throw UsageError("--step-limit must be >= 1");
                   const EnvConfig env{o->env, o->success_radius, o->step_limit};
                   const auto demos = generate_demos(env, o->count, o->seed);
                   write_episodes(std::filesystem::path(o->path), demos);
                   std::size_t steps = 0;
                   for (const auto& ep : demos) steps += ep.steps.size();
                   std::printf("wrote %zu %s demos (seed %llu, %zu steps) to %s\n", demos.size(),
                               o->env.c_str(), static_cast<unsigned long long>(o->seed), steps,
                               o->path.c_str());
                   return kExitOk;
                 }});
}

// ---- fit-bounds ----------------------------------------------------------------

void add_fit_bounds(CLI::App& app, std::vector<Command>& out) {
  struct Options {
    std::string config;
    std::string demos;
    int horizon = 8;
    int resolution = 1000;
    double padding = 0.0;
    std::string path = "codec.json";
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("fit-bounds", "Fit per-dimension action bounds from demonstrations");
  add_config_option(*sub, o->config);
  sub->add_option("--demos", o->demos, "Demonstrations JSONL")->required();
  sub->add_option("--horizon", o->horizon, "Chunk length H")->capture_default_str();
  sub->add_option("--resolution", o->resolution, "Integer range B")->capture_default_str();
  sub->add_option("--padding", o->padding, "Fraction of the range added on each side")->capture_default_str();
  sub->add_option("--out", o->path, "Output codec config")->capture_default_str();

  out.push_back({sub, [o] {
                   const auto demos = load_demos(o->demos);
                   std::vector<ActionChunk> chunks;
                   for (const auto& ep : demos) {
                     if (!ep.steps.empty()) chunks.push_back(ep.actions());
                   }
                   CodecConfig cfg;
                   try {
                     cfg.bounds = fit_bounds(chunks, o->padding);
                     cfg.dims = static_cast<int>(cfg.bounds.size());
                     cfg.horizon = o->horizon;
                     cfg.resolution = o->resolution;
                     save_codec_config(cfg, o->path);
                   } catch (const std::invalid_argument& e) {
                     throw UsageError(e.what());
                   }
                   for (int j = 0; j < cfg.dims; ++j) {
                     std::printf("dim %d: [%.9g, %.9g]\n", j, cfg.bounds[j].lo, cfg.bounds[j].hi);
                   }
                   std::printf("wrote %s\n", o->path.c_str());
                   return kExitOk;
                 }});
}

// ---- export-samples -------------------------------------------------------------

void add_export_samples(CLI::App& app, std::vector<Command>& out) {
  struct Options {
    std::string config;
    std::string demos;
    std::string codec_file;
    int horizon = 8;
    int resolution = 1000;
    double mask_p = 0.3;
    char mask_char = '#';
    std::uint64_t seed = 0;
    std::string path = "samples.jsonl";
    std::string images_dir;
    std::string layout = "tiled";
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("export-samples", "Export masked training samples as JSONL");
  add_config_option(*sub, o->config);
  sub->add_option("--demos", o->demos, "Demonstrations JSONL")->required();
  sub->add_option("--bounds-file", o->codec_file, "Codec config (defaults to the environment bounds)");
  sub->add_option("--horizon", o->horizon, "Chunk length H without --bounds-file")->capture_default_str();
  sub->add_option("--resolution", o->resolution, "Integer range B without --bounds-file")->capture_default_str();
  sub->add_option("--mask-p", o->mask_p, "Per-digit mask probability")->capture_default_str();
  sub->add_option("--mask-char", o->mask_char, "Mask character")->capture_default_str();
  sub->add_option("--seed", o->seed, "Mask seed")->capture_default_str();
  sub->add_option("--out", o->path, "Output JSONL")->capture_default_str();
  sub->add_option("--images-dir", o->images_dir, "Render observations to PNG files here");
  sub->add_option("--layout", o->layout, "Image layout")->check(CLI::IsMember({"tiled", "separate"}));

  out.push_back({sub, [o] {
                   const auto demos = load_demos(o->demos);
                   CodecConfig codec;
                   try {
                     codec = o->codec_file.empty() ? default_codec(demos.front().env, o->horizon, o->resolution)
                                                   : load_codec_config(o->codec_file);
                     MaskConfig{o->mask_p, o->mask_char, 0}.validate();
                   } catch (const std::exception& e) {
                     throw UsageError(e.what());
                   }
                   const ImageLayout layout = image_layout_from_string(o->layout);
                   if (!o->images_dir.empty()) std::filesystem::create_directories(o->images_dir);

                   std::ofstream file(o->path, std::ios::binary);
                   if (!file) throw UsageError("cannot write " + o->path);
                   std::size_t total = 0, skipped = 0;
                   for (std::size_t i = 0; i < demos.size(); ++i) {
                     const auto& ep = demos[i];
                     if (static_cast<int>(ep.steps.size()) < codec.horizon || ep.dims != codec.dims) {
                       ++skipped;
                       continue;
                     }
                     const MaskConfig mask{o->mask_p, o->mask_char, mix_seed(o->seed, i)};
                     auto samples = make_training_samples(ep, codec, mask);
                     if (!o->images_dir.empty()) {
                       auto env = make_environment({ep.env});
                       for (auto& s : samples) {
                         env->set_observation(ep.steps[s.start_index].state);
                         auto views = env->render();
                         if (layout == ImageLayout::Tiled) views = {tile_images(views)};
                         for (std::size_t v = 0; v < views.size(); ++v) {
                           char name[64];
                           std::snprintf(name, sizeof name, "ep%04zu_t%04zu_v%zu.png", i, s.start_index, v);
                           const auto path = std::filesystem::path(o->images_dir) / name;
                           write_png(views[v], path);
                           s.image_paths.push_back(path.string());
                         }
                       }
                     }
                     write_samples_jsonl(file, samples);
                     total += samples.size();
                   }
                   std::printf("wrote %zu samples from %zu episodes to %s", total, demos.size() - skipped,
                               o->path.c_str());
                   if (skipped) std::printf(" (%zu episodes skipped)", skipped);
                   std::printf("\n");
                   return kExitOk;
                 }});
}

// ---- codec-check ------------------------------------------------------------------

void add_codec_check(CLI::App& app, std::vector<Command>& out) {
  struct Options {
    std::string config;
    std::string bounds_file;
    int dims = 7;
    double lo = -1.0;
    double hi = 1.0;
    int horizon = 8;
    int resolution = 1000;
    int trials = 10000;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("codec-check", "Round-trip and monotonicity checks for a codec");
  add_config_option(*sub, o->config);
  sub->add_option("--bounds-file", o->bounds_file, "Codec config or {\"bounds\": [[lo, hi], ...]}");
  sub->add_option("--dims", o->dims, "Dimensions without --bounds-file")->capture_default_str();
  sub->add_option("--lo", o->lo, "Lower bound without --bounds-file")->capture_default_str();
  sub->add_option("--hi", o->hi, "Upper bound without --bounds-file")->capture_default_str();
  sub->add_option("--horizon", o->horizon, "Chunk length H")->capture_default_str();
  auto* res = sub->add_option("--resolution", o->resolution, "Integer range B")->capture_default_str();
  sub->add_option("--trials", o->trials, "Random chunks to round-trip")->capture_default_str();
  sub->add_option("--seed", o->seed, "Sampling seed")->capture_default_str();

  out.push_back({sub, [o, res] {
                   CodecConfig cfg;
                   cfg.horizon = o->horizon;
                   cfg.resolution = o->resolution;
                   try {
                     if (o->bounds_file.empty()) {
                       cfg.dims = o->dims;
                       cfg.bounds.assign(static_cast<std::size_t>(std::max(o->dims, 0)), Bounds{o->lo, o->hi});
                     } else {
                       const json doc = read_json_file(o->bounds_file);
                       for (const auto& pair : doc.at("bounds")) {
                         cfg.bounds.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
                       }
                       cfg.dims = static_cast<int>(cfg.bounds.size());
                       if (doc.contains("dims") && doc.at("dims").get<int>() != cfg.dims) {
                         throw UsageError("dims does not match the number of bounds");
                       }
                       cfg.horizon = doc.value("horizon", cfg.horizon);
                       if (res->count() == 0) cfg.resolution = doc.value("resolution", cfg.resolution);
                     }
                     cfg.validate();
                   } catch (const json::exception& e) {
                     throw UsageError(o->bounds_file + ": " + e.what());
                   } catch (const CodecError& e) {
                     throw UsageError(std::string("invalid codec: ") + e.what());
                   }
                   if (o->trials < 1) throw UsageError("--trials must be >= 1");

                   const auto d = static_cast<std::size_t>(cfg.dims);
                   const auto h = static_cast<std::size_t>(cfg.horizon);
                   std::vector<double> max_err(d, 0.0);
                   bool text_ok = true;
                   Rng rng(o->seed);
                   for (int trial = 0; trial < o->trials; ++trial) {
                     ActionChunk x(h, d);
                     for (std::size_t r = 0; r < h; ++r) {
                       for (std::size_t j = 0; j < d; ++j) {
                         const auto& b = cfg.bounds[j];
                         // First trial pins the endpoints.
                         x(r, j) = trial == 0 ? (r % 2 ? b.hi : b.lo) : rng.uniform(b.lo, b.hi);
                       }
                     }
                     const QuantizedChunk q = quantize(x, cfg);
                     const ActionChunk back = dequantize(q, cfg);
                     for (std::size_t r = 0; r < h; ++r)
                       for (std::size_t j = 0; j < d; ++j) max_err[j] = std::max(max_err[j], std::abs(back(r, j) - x(r, j)));
                     const ParseResult parsed = parse_text(encode_text(q), cfg);
                     text_ok = text_ok && parsed.ok() && parsed.chunk().values == q.values;
                   }

                   bool monotone = true;
                   for (std::size_t j = 0; j < d; ++j) {
                     const auto& b = cfg.bounds[j];
                     std::int64_t prev = -1;
                     const int steps = 4 * cfg.resolution + 1;
                     for (int k = 0; k <= steps; ++k) {
                       const double v = b.lo + (b.hi - b.lo) * k / steps;
                       const std::int64_t qv = quantize_value(v, b, cfg.resolution);
                       monotone = monotone && qv >= prev;
                       prev = qv;
                     }
                   }

                   bool ok = text_ok && monotone;
                   std::printf("codec H=%d D=%d B=%d, %d trials\n", cfg.horizon, cfg.dims, cfg.resolution, o->trials);
                   for (std::size_t j = 0; j < d; ++j) {
                     const double bound = cfg.max_error(j);
                     const bool dim_ok = max_err[j] <= bound;
                     ok = ok && dim_ok;
                     std::printf("dim %zu [%.9g, %.9g]: max error %.9g, bound %.9g %s\n", j, cfg.bounds[j].lo,
                                 cfg.bounds[j].hi, max_err[j], bound, dim_ok ? "ok" : "EXCEEDED");
                   }
                   std::printf("text round trip: %s\n", text_ok ? "ok" : "FAILED");
                   std::printf("monotonicity: %s\n", monotone ? "ok" : "FAILED");
                   std::printf("%s\n", ok ? "PASS" : "FAIL");
                   return ok ? kExitOk : kExitFailure;
                 }});
}

// ---- mask-preview -------------------------------------------------------------------

void add_mask_preview(CLI::App& app, std::vector<Command>& out) {
  struct Options {
    std::string config;
    std::string text;
    double p = 0.3;
    char mask_char = '#';
    std::uint64_t seed = 0;
    bool stats = false;
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("mask-preview", "Show digit masking on action text (stdin without --text)");
  add_config_option(*sub, o->config);
  sub->add_option("--text", o->text, "Action text to mask");
  sub->add_option("--p", o->p, "Per-digit mask probability")->capture_default_str();
  sub->add_option("--mask-char", o->mask_char, "Mask character")->capture_default_str();
  sub->add_option("--seed", o->seed, "Mask seed")->capture_default_str();
  sub->add_flag("--stats", o->stats, "Print the observed mask rate");

  out.push_back({sub, [o, sub] {
                   MaskConfig cfg{o->p, o->mask_char, o->seed};
                   try {
                     cfg.validate();
                   } catch (const AugmentationError& e) {
                     throw UsageError(e.what());
                   }
                   std::vector<std::string> lines;
                   if (sub->get_option("--text")->count() > 0) {
                     lines.push_back(o->text);
                   } else {
                     for (std::string line; std::getline(std::cin, line);) lines.push_back(line);
                   }
                   std::size_t digits = 0, masked = 0;
                   for (std::size_t i = 0; i < lines.size(); ++i) {
                     cfg.seed = mix_seed(o->seed, i);
                     const std::string m = mask_action_text(lines[i], cfg);
                     for (std::size_t k = 0; k < m.size(); ++k) {
                       if (lines[i][k] >= '0' && lines[i][k] <= '9') {
                         ++digits;
                         masked += m[k] == o->mask_char;
                       }
                     }
                     std::printf("%s\n", m.c_str());
                   }
                   if (o->stats) {
                     std::printf("masked %zu of %zu digits (%.4f)\n", masked, digits,
                                 digits ? static_cast<double>(masked) / static_cast<double>(digits) : 0.0);
                   }
                   return kExitOk;
                 }});
}

}  // namespace textact::cli
