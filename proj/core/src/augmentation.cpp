// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include "textact/augmentation.hpp"

#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "textact/random.hpp"

namespace textact {

void MaskConfig::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw AugmentationError("mask probability must be in [0, 1]");
  const char c = mask_char;
  if ((c >= '0' && c <= '9') || c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
      c == '\f' || c == '-' || c == '\0') {
    throw AugmentationError(std::string("invalid mask character '") + c + "'");
  }
}

std::string mask_action_text(std::string_view text, const MaskConfig& cfg) {
  cfg.validate();
  std::string out(text);
  if (cfg.p == 0.0) return out;
  Rng rng(cfg.seed);
  for (char& c : out) {
    if (c < '0' || c > '9') continue;
    if (rng.bernoulli(cfg.p)) c = cfg.mask_char;
  }
  return out;
}

std::vector<TrainingSample> make_training_samples(const Episode& episode, const CodecConfig& cfg,
                                                  const MaskConfig& mask) {
  cfg.validate();
  mask.validate();
  const std::size_t horizon = static_cast<std::size_t>(cfg.horizon);
  if (episode.steps.size() < horizon) {
    throw AugmentationError("episode has " + std::to_string(episode.steps.size()) +
                            " steps, need at least H=" + std::to_string(horizon));
  }
  const ActionChunk actions = episode.actions();
  if (actions.cols() != static_cast<std::size_t>(cfg.dims)) {
    throw AugmentationError("episode action dimension does not match codec");
  }

  const PromptBundle prompt = build_prompt(cfg, episode.instruction.empty() ? "act" : episode.instruction,
                                           {}, ImageLayout::Separate);
  std::vector<TrainingSample> samples;
  samples.reserve(actions.rows() - horizon + 1);
  for (std::size_t start = 0; start + horizon <= actions.rows(); ++start) {
    ActionChunk window(horizon, actions.cols());
    for (std::size_t t = 0; t < horizon; ++t) {
      for (std::size_t d = 0; d < actions.cols(); ++d) window(t, d) = actions(start + t, d);
    }
    TrainingSample s;
    s.prompt = prompt;
    s.start_index = start;
    s.target_text = chunk_to_text(window, cfg);
    MaskConfig m = mask;
    m.seed = mix_seed(mask.seed, start);
    s.masked_text = mask_action_text(s.target_text, m);
    samples.push_back(std::move(s));
  }
  return samples;
}

void write_samples_jsonl(std::ostream& out, const std::vector<TrainingSample>& samples) {
  for (const auto& s : samples) {
    nlohmann::json line = {{"instruction", s.prompt.instruction},
                           {"images", s.image_paths},
                           {"target_text", s.target_text},
                           {"masked_text", s.masked_text}};
    out << line.dump() << '\n';
  }
}

}  // namespace textact
