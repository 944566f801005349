// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include "textact/prompting.hpp"

#include <algorithm>
#include <cstring>

namespace textact {

std::string_view to_string(ImageLayout layout) noexcept {
  return layout == ImageLayout::Tiled ? "tiled" : "separate";
}

ImageLayout image_layout_from_string(std::string_view name) {
  if (name == "tiled") return ImageLayout::Tiled;
  if (name == "separate") return ImageLayout::Separate;
  throw PromptError("unknown image layout '" + std::string(name) + "'");
}

std::string build_system_prompt(int horizon, int dims, int resolution) {
  if (horizon < 1 || dims < 1 || resolution < 1) {
    throw PromptError("prompt parameters must be positive");
  }
  const long long total = static_cast<long long>(horizon) * dims;
  std::string out;
  out += "Analyze the input image and predict robot actions for the next ";
  out += std::to_string(horizon);
  out += " timesteps. Each action has ";
  out += std::to_string(dims);
  out += " dimensions. Output a single sequence of ";
  out += std::to_string(total);
  out += " integers (0 - ";
  out += std::to_string(resolution);
  out += " each), representing the ";
  out += std::to_string(horizon);
  out += " timesteps sequentially. Provide only space-separated numbers. Nothing else.";
  return out;
}

RgbImage tile_images(const std::vector<RgbImage>& images) {
  if (images.empty()) throw PromptError("tile_images: no images");
  int width = 0;
  int height = 0;
  for (const auto& img : images) {
    width += img.width;
    height = std::max(height, img.height);
  }
  RgbImage out(width, height);
  int x0 = 0;
  for (const auto& img : images) {
    const std::size_t row_bytes = static_cast<std::size_t>(img.width) * 3;
    for (int y = 0; y < img.height; ++y) {
      std::memcpy(out.at(x0, y), img.at(0, y), row_bytes);
    }
    x0 += img.width;
  }
  return out;
}

PromptBundle build_prompt(const CodecConfig& cfg, std::string_view instruction,
                          std::vector<RgbImage> images, ImageLayout layout) {
  constexpr std::string_view kWhitespace = " \t\n\r\v\f";
  const auto first = instruction.find_first_not_of(kWhitespace);
  if (first == std::string_view::npos) throw PromptError("instruction must not be empty");
  const auto last = instruction.find_last_not_of(kWhitespace);

  PromptBundle bundle;
  bundle.system_prompt = build_system_prompt(cfg.horizon, cfg.dims, cfg.resolution);
  bundle.instruction = std::string(instruction.substr(first, last - first + 1));
  bundle.layout = layout;
  if (layout == ImageLayout::Tiled) {
    bundle.images.push_back(tile_images(images));
  } else {
    bundle.images = std::move(images);
  }
  return bundle;
}

}  // namespace textact
