// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include "textact/image.hpp"

#include <gtest/gtest.h>

#include "textact/random.hpp"

namespace textact {
namespace {

TEST(PngTest, EncodeDecodePreservesPixels) {
  Rng rng(2);
  RgbImage img(17, 9);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
  EXPECT_EQ(decode_png(encode_png(img)), img);
}

TEST(PngTest, RejectsGarbage) {
  const std::vector<std::uint8_t> junk = {1, 2, 3, 4, 5};
  EXPECT_THROW(decode_png(junk), ImageError);
  EXPECT_THROW(encode_png(RgbImage{}), ImageError);
}

TEST(Base64Test, KnownVectors) {
  auto bytes = [](std::string_view s) { return std::vector<std::uint8_t>(s.begin(), s.end()); };
  EXPECT_EQ(base64_encode(bytes("")), "");
  EXPECT_EQ(base64_encode(bytes("f")), "Zg==");
  EXPECT_EQ(base64_encode(bytes("fo")), "Zm8=");
  EXPECT_EQ(base64_encode(bytes("foobar")), "Zm9vYmFy");
  EXPECT_EQ(base64_decode("Zg=="), bytes("f"));
  EXPECT_EQ(base64_decode("Zm8="), bytes("fo"));
  EXPECT_EQ(base64_decode("Zm9vYmFy"), bytes("foobar"));
  EXPECT_THROW(base64_decode("abc"), ImageError);
  EXPECT_THROW(base64_decode("a$c="), ImageError);
}

TEST(Base64Test, DataUrlPrefix) {
  RgbImage img(2, 2);
  EXPECT_TRUE(png_data_url(img).starts_with("data:image/png;base64,iVBOR"));
}

}  // namespace
}  // namespace textact
