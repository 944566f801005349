// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "textact/codec.hpp"
#include "textact/image.hpp"

namespace textact {

enum class ImageLayout { Separate, Tiled };

std::string_view to_string(ImageLayout layout) noexcept;
ImageLayout image_layout_from_string(std::string_view name);

class PromptError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything the model sees for one query.
struct PromptBundle {
  std::string system_prompt;
  std::string instruction;
  std::vector<RgbImage> images;
  ImageLayout layout = ImageLayout::Separate;
};

/// The fixed system prompt with H, D, H*D and B substituted. ASCII only.
std::string build_system_prompt(int horizon, int dims, int resolution);

/// Left-to-right horizontal concatenation. Shorter images are padded with
/// black rows at the bottom. Throws PromptError on an empty list.
RgbImage tile_images(const std::vector<RgbImage>& images);

/// Trims surrounding whitespace from the instruction and tiles the images
/// when layout is Tiled.
PromptBundle build_prompt(const CodecConfig& cfg, std::string_view instruction,
                          std::vector<RgbImage> images, ImageLayout layout);

}  // namespace textact
