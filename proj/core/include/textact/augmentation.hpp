// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "textact/codec.hpp"
#include "textact/episode.hpp"
#include "textact/prompting.hpp"

namespace textact {

class AugmentationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct MaskConfig {
  double p = 0.0;
  char mask_char = '#';
  std::uint64_t seed = 0;

  /// p in [0, 1]; mask_char must not be a digit, whitespace or '-'.
  void validate() const;
};

/// Replaces each digit independently with mask_char with probability p.
/// Everything that is not an ASCII digit passes through untouched, so the
/// output has the same length and the same space positions as the input.
std::string mask_action_text(std::string_view text, const MaskConfig& cfg);

/// A target string plus its masked conditioning copy. The loss target stays
/// target_text; masked_text is what the model conditions on.
struct TrainingSample {
  PromptBundle prompt;
  std::vector<std::string> image_paths;
  std::size_t start_index = 0;
  std::string target_text;
  std::string masked_text;
};

/// Sliding windows of H actions with stride 1. Window i is masked with
/// seed mix_seed(mask.seed, i). Throws if the episode has fewer than H steps.
std::vector<TrainingSample> make_training_samples(const Episode& episode, const CodecConfig& cfg,
                                                  const MaskConfig& mask);

/// One JSON object per line: "instruction", "images", "target_text", "masked_text".
void write_samples_jsonl(std::ostream& out, const std::vector<TrainingSample>& samples);

}  // namespace textact
