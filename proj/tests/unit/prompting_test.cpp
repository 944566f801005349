// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include "textact/prompting.hpp"

#include <regex>

#include <gtest/gtest.h>

#include "textact/random.hpp"

namespace textact {
namespace {

RgbImage solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, r, g, b);
  return img;
}

TEST(SystemPromptTest, GoldenBytes) {
  EXPECT_EQ(build_system_prompt(8, 7, 1000),
            "Analyze the input image and predict robot actions for the next 8 timesteps. "
            "Each action has 7 dimensions. Output a single sequence of 56 integers (0 - 1000 each), "
            "representing the 8 timesteps sequentially. Provide only space-separated numbers. "
            "Nothing else.");
}

TEST(SystemPromptTest, MinimalSubstitution) {
  const auto p = build_system_prompt(1, 1, 2);
  EXPECT_NE(p.find("next 1 timesteps"), std::string::npos);
  EXPECT_NE(p.find("1 integers (0 - 2 each)"), std::string::npos);
  EXPECT_EQ(p, build_system_prompt(1, 1, 2));
  EXPECT_THROW(build_system_prompt(0, 1, 2), PromptError);
}

TEST(SystemPromptTest, AsciiOnly) {
  for (unsigned char c : build_system_prompt(16, 7, 4000)) EXPECT_LT(c, 0x80);
}

// Extract the integers from their fixed positions and recover (H, D, H*D, B).
TEST(SystemPromptTest, TemplateReparsesProperty) {
  const std::regex pattern(
      R"(^Analyze the input image and predict robot actions for the next (\d+) timesteps\. )"
      R"(Each action has (\d+) dimensions\. Output a single sequence of (\d+) integers \(0 - (\d+) each\), )"
      R"(representing the (\d+) timesteps sequentially\. Provide only space-separated numbers\. Nothing else\.$)");
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    const int h = 1 + static_cast<int>(rng.below(64));
    const int d = 1 + static_cast<int>(rng.below(32));
    const int b = 1 + static_cast<int>(rng.below(100000));
    std::smatch m;
    const std::string p = build_system_prompt(h, d, b);
    ASSERT_TRUE(std::regex_match(p, m, pattern)) << p;
    EXPECT_EQ(std::stoi(m[1]), h);
    EXPECT_EQ(std::stoi(m[2]), d);
    EXPECT_EQ(std::stoi(m[3]), h * d);
    EXPECT_EQ(std::stoi(m[4]), b);
    EXPECT_EQ(std::stoi(m[5]), h);
  }
}

TEST(TileImagesTest, ConcatenatesLeftToRight) {
  const auto a = solid(64, 64, 255, 0, 0);
  const auto b = solid(64, 64, 0, 0, 255);
  const auto t = tile_images({a, b});
  EXPECT_EQ(t.width, 128);
  EXPECT_EQ(t.height, 64);
  EXPECT_EQ(t.at(10, 10)[0], 255);
  EXPECT_EQ(t.at(70, 10)[2], 255);
}

TEST(TileImagesTest, SingleImageIsIdentity) {
  Rng rng(1);
  RgbImage img(13, 7);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
  EXPECT_EQ(tile_images({img}), img);
}

TEST(TileImagesTest, PadsShortImagesWithBlack) {
  const auto t = tile_images({solid(64, 48, 9, 9, 9), solid(64, 64, 7, 7, 7)});
  EXPECT_EQ(t.width, 128);
  EXPECT_EQ(t.height, 64);
  for (int y = 48; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      EXPECT_EQ(t.at(x, y)[0], 0);
      EXPECT_EQ(t.at(x, y)[1], 0);
      EXPECT_EQ(t.at(x, y)[2], 0);
    }
  }
  EXPECT_EQ(t.at(0, 47)[0], 9);
  EXPECT_EQ(t.at(64, 63)[0], 7);
}

TEST(TileImagesTest, PreservesSourcePixelsProperty) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RgbImage> images;
    const int n = 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < n; ++i) {
      RgbImage img(1 + static_cast<int>(rng.below(20)), 1 + static_cast<int>(rng.below(20)));
      for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
      images.push_back(std::move(img));
    }
    const auto tiled = tile_images(images);
    int x0 = 0;
    for (const auto& img : images) {
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
          for (int c = 0; c < 3; ++c) ASSERT_EQ(tiled.at(x0 + x, y)[c], img.at(x, y)[c]);
      x0 += img.width;
    }
  }
}

TEST(TileImagesTest, EmptyListThrows) { EXPECT_THROW(tile_images({}), PromptError); }

TEST(BuildPromptTest, Layouts) {
  CodecConfig cfg{8, 2, 1000, {{-1, 1}, {-1, 1}}};
  const std::vector<RgbImage> images = {solid(4, 4, 1, 1, 1), solid(4, 4, 2, 2, 2)};
  const auto tiled = build_prompt(cfg, "put the banana on the plate", images, ImageLayout::Tiled);
  ASSERT_EQ(tiled.images.size(), 1u);
  EXPECT_EQ(tiled.images[0].width, 8);
  EXPECT_EQ(tiled.system_prompt, build_system_prompt(8, 2, 1000));

  const auto separate = build_prompt(cfg, "put the banana on the plate", images, ImageLayout::Separate);
  ASSERT_EQ(separate.images.size(), 2u);
  EXPECT_EQ(separate.images[0], images[0]);
  EXPECT_EQ(separate.images[1], images[1]);
}

TEST(BuildPromptTest, InstructionTrimmedOnlyAtEdges) {
  CodecConfig cfg{1, 1, 10, {{0, 1}}};
  EXPECT_EQ(build_prompt(cfg, "  put  the banana\ton the plate \n", {}, ImageLayout::Separate).instruction,
            "put  the banana\ton the plate");
  EXPECT_THROW(build_prompt(cfg, "", {}, ImageLayout::Separate), PromptError);
  EXPECT_THROW(build_prompt(cfg, " \t", {}, ImageLayout::Separate), PromptError);
  EXPECT_THROW(build_prompt(cfg, "go", {}, ImageLayout::Tiled), PromptError);
}

TEST(ImageLayoutTest, Names) {
  EXPECT_EQ(image_layout_from_string("tiled"), ImageLayout::Tiled);
  EXPECT_EQ(image_layout_from_string(to_string(ImageLayout::Separate)), ImageLayout::Separate);
  EXPECT_THROW(image_layout_from_string("grid"), PromptError);
}

}  // namespace
}  // namespace textact
