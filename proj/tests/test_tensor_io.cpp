/* Copyright 2026 The cosod Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include <gtest/gtest.h>
#include <png.h>

#include "cosod/error.hpp"
#include "cosod/harness.hpp"
#include "cosod/tensor_io.hpp"
#include "test_util.hpp"

namespace cosod {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

void write_png_with(const fs::path& path, int width, int height, int bit_depth, int color_type) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  ASSERT_NE(fp, nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    FAIL() << "libpng write failed";
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  std::vector<png_byte> row(static_cast<std::size_t>(width * channels * (bit_depth / 8 > 0 ? bit_depth / 8 : 1)), 77);
  for (int r = 0; r < height; ++r) png_write_row(png, row.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

TEST(PlaneFile, FloatRoundTrip2x2) {
  TempDir dir;
  FloatPlane p(2, 2);
  p << 0.0f, 0.5f, 0.5f, 1.0f;
  io::write_plane_file(p, dir / "a.plane");
  const auto stack = io::read_plane_file(dir / "a.plane");
  const auto& planes = std::get<std::vector<FloatPlane>>(stack);
  ASSERT_EQ(planes.size(), 1u);
  EXPECT_EQ(planes[0].rows(), 2);
  EXPECT_EQ(planes[0].cols(), 2);
  EXPECT_TRUE((planes[0] == p).all());
}

TEST(PlaneFile, HeaderLayoutIsLittleEndian) {
  FloatPlane p(2, 3);
  p.setConstant(1.0f);
  const std::vector<FloatPlane> planes = {p, p};
  const auto bytes = io::encode_planes(std::span<const FloatPlane>(planes));
  ASSERT_EQ(bytes.size(), 20u + 2 * 6 * 4);
  const std::vector<std::uint8_t> header(bytes.begin(), bytes.begin() + 20);
  const std::vector<std::uint8_t> expected = {'C', 'S', 'P', 'L', 1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0};
  EXPECT_EQ(header, expected);
  // 1.0f = 0x3f800000
  EXPECT_EQ(bytes[20], 0x00);
  EXPECT_EQ(bytes[23], 0x3f);
}

TEST(PlaneFile, LabelsZeroToEight) {
  TempDir dir;
  ClusterMap clusters{LabelPlane(3, 3)};
  for (int i = 0; i < 9; ++i) clusters.labels.data()[i] = i;
  io::write_clusters(clusters, dir / "c.clus.plane");
  const ClusterMap back = io::read_clusters(dir / "c.clus.plane");
  std::set<std::int32_t> distinct(back.labels.data(), back.labels.data() + back.labels.size());
  EXPECT_EQ(distinct.size(), 9u);
  EXPECT_EQ(back.num_categories(), 9);
  EXPECT_TRUE((back.labels == clusters.labels).all());
}

TEST(PlaneFile, RandomRoundTripIsBitExact) {
  harness::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = rng.integer(1, 64), cols = rng.integer(1, 64), n = rng.integer(1, 4);
    std::vector<FloatPlane> floats;
    std::vector<LabelPlane> labels;
    for (int k = 0; k < n; ++k) {
      FloatPlane f(rows, cols);
      LabelPlane l(rows, cols);
      for (Eigen::Index i = 0; i < f.size(); ++i) {
        f.data()[i] = static_cast<float>(rng.uniform(-1e6, 1e6));
        l.data()[i] = static_cast<std::int32_t>(rng.next());
      }
      floats.push_back(f);
      labels.push_back(l);
    }
    const auto fb = io::encode_planes(std::span<const FloatPlane>(floats));
    const auto lb = io::encode_planes(std::span<const LabelPlane>(labels));
    const auto f_back = std::get<std::vector<FloatPlane>>(io::decode_planes(fb));
    const auto l_back = std::get<std::vector<LabelPlane>>(io::decode_planes(lb));
    ASSERT_EQ(f_back.size(), floats.size());
    for (std::size_t k = 0; k < floats.size(); ++k) {
      EXPECT_EQ(std::memcmp(f_back[k].data(), floats[k].data(), sizeof(float) * floats[k].size()), 0);
      EXPECT_TRUE((l_back[k] == labels[k]).all());
    }
  }
}

TEST(PlaneFile, NegativeZeroSurvives) {
  FloatPlane p(1, 1);
  p(0, 0) = -0.0f;
  const std::vector<FloatPlane> planes = {p};
  const auto back = std::get<std::vector<FloatPlane>>(io::decode_planes(io::encode_planes(std::span(planes))));
  EXPECT_TRUE(std::signbit(back[0](0, 0)));
}

TEST(PlaneFile, CorruptMagic) {
  FloatPlane p = FloatPlane::Zero(2, 2);
  const std::vector<FloatPlane> planes = {p};
  auto bytes = io::encode_planes(std::span(planes));
  bytes[0] = 'X';
  EXPECT_COSOD_ERROR(io::decode_planes(bytes), ErrorCode::kBadMagic);
}

TEST(PlaneFile, TruncatedAndTrailing) {
  FloatPlane p = FloatPlane::Zero(2, 2);
  const std::vector<FloatPlane> planes = {p};
  auto bytes = io::encode_planes(std::span(planes));
  auto short_bytes = bytes;
  short_bytes.pop_back();
  EXPECT_COSOD_ERROR(io::decode_planes(short_bytes), ErrorCode::kTruncated);
  const std::vector<std::uint8_t> header_only(bytes.begin(), bytes.begin() + 10);
  EXPECT_COSOD_ERROR(io::decode_planes(header_only), ErrorCode::kTruncated);
  bytes.push_back(0);
  EXPECT_COSOD_ERROR(io::decode_planes(bytes), ErrorCode::kTrailingData);
}

TEST(PlaneFile, BadHeaderFields) {
  FloatPlane p = FloatPlane::Zero(1, 1);
  const std::vector<FloatPlane> planes = {p};
  const auto good = io::encode_planes(std::span(planes));
  auto bad_version = good;
  bad_version[4] = 2;
  EXPECT_COSOD_ERROR(io::decode_planes(bad_version), ErrorCode::kBadHeader);
  auto bad_dtype = good;
  bad_dtype[5] = 7;
  EXPECT_COSOD_ERROR(io::decode_planes(bad_dtype), ErrorCode::kBadHeader);
  auto zero_dim = good;
  zero_dim[12] = 0;
  EXPECT_COSOD_ERROR(io::decode_planes(zero_dim), ErrorCode::kBadHeader);
}

TEST(PlaneFile, DimensionOverflow) {
  std::vector<std::uint8_t> bytes = {'C', 'S', 'P', 'L', 1, 0, 0, 0};
  for (int k = 0; k < 3; ++k) bytes.insert(bytes.end(), {0xff, 0xff, 0xff, 0xff});
  EXPECT_COSOD_ERROR(io::decode_planes(bytes), ErrorCode::kDimOverflow);
}

TEST(PlaneFile, NonFiniteRejectedBothWays) {
  FloatPlane p = FloatPlane::Zero(2, 2);
  p(1, 0) = std::numeric_limits<float>::quiet_NaN();
  const std::vector<FloatPlane> planes = {p};
  EXPECT_COSOD_ERROR(io::encode_planes(std::span(planes)), ErrorCode::kNonFinite);

  p(1, 0) = 0.0f;
  const std::vector<FloatPlane> clean = {p};
  auto bytes = io::encode_planes(std::span(clean));
  const float inf = std::numeric_limits<float>::infinity();
  std::memcpy(bytes.data() + 20, &inf, sizeof(float));
  EXPECT_COSOD_ERROR(io::decode_planes(bytes), ErrorCode::kNonFinite);
}

TEST(PlaneFile, TypedReadersCheckDtype) {
  TempDir dir;
  io::write_plane_file(FloatPlane(FloatPlane::Zero(2, 2)), dir / "f.plane");
  io::write_plane_file(LabelPlane(LabelPlane::Zero(2, 2)), dir / "l.plane");
  EXPECT_COSOD_ERROR(io::read_clusters(dir / "f.plane"), ErrorCode::kWrongDtype);
  EXPECT_COSOD_ERROR(io::read_attention(dir / "l.plane"), ErrorCode::kWrongDtype);
  EXPECT_COSOD_ERROR(io::read_plane_file(dir / "missing.plane"), ErrorCode::kIo);
  LabelPlane negative = LabelPlane::Zero(2, 2);
  negative(0, 1) = -3;
  io::write_plane_file(negative, dir / "neg.plane");
  EXPECT_COSOD_ERROR(io::read_clusters(dir / "neg.plane"), ErrorCode::kInvalidLabel);
}

TEST(Png, ThresholdRule) {
  TempDir dir;
  Plane<std::uint8_t> px(1, 4);
  px << 0, 255, 127, 128;
  io::write_gray_png(px, dir / "t.png");
  const BinaryMask mask = io::read_mask_png(dir / "t.png");
  ASSERT_EQ(mask.cols(), 4);
  EXPECT_FALSE(mask(0, 0));
  EXPECT_TRUE(mask(0, 1));
  EXPECT_FALSE(mask(0, 2));
  EXPECT_TRUE(mask(0, 3));
  const FloatPlane pred = io::read_prediction_png(dir / "t.png");
  EXPECT_FLOAT_EQ(pred(0, 2), 127.0f / 255.0f);
}

TEST(Png, MaskRoundTripWritesZeroAnd255) {
  TempDir dir;
  harness::Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    BinaryMask mask(rng.integer(1, 70), rng.integer(1, 70));
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng.uniform() < 0.4;
    io::write_mask_png(mask, dir / "m.png");
    EXPECT_TRUE((io::read_mask_png(dir / "m.png") == mask).all());
    const auto gray = io::read_gray_png(dir / "m.png");
    EXPECT_TRUE((gray == 0 || gray == 255).all());
  }
}

TEST(Png, LargeImageSpansSeveralStoredBlocks) {
  TempDir dir;
  Plane<std::uint8_t> px(300, 301);
  for (Eigen::Index i = 0; i < px.size(); ++i) px.data()[i] = static_cast<std::uint8_t>(i * 7);
  io::write_gray_png(px, dir / "big.png");
  EXPECT_TRUE((io::read_gray_png(dir / "big.png") == px).all());
}

TEST(Png, RejectsRgbAndSixteenBit) {
  TempDir dir;
  write_png_with(dir / "rgb.png", 4, 3, 8, PNG_COLOR_TYPE_RGB);
  EXPECT_COSOD_ERROR(io::read_mask_png(dir / "rgb.png"), ErrorCode::kWrongColorType);
  write_png_with(dir / "g16.png", 4, 3, 16, PNG_COLOR_TYPE_GRAY);
  EXPECT_COSOD_ERROR(io::read_mask_png(dir / "g16.png"), ErrorCode::kUnsupportedBitDepth);
  write_png_with(dir / "g8.png", 4, 3, 8, PNG_COLOR_TYPE_GRAY);
  EXPECT_EQ(io::read_gray_png(dir / "g8.png")(2, 3), 77);
}

TEST(Png, GarbageFailsToDecode) {
  TempDir dir;
  testing::write_text(dir / "junk.png", "\x89PNG\r\n\x1a\n not really a png");
  EXPECT_COSOD_ERROR(io::read_mask_png(dir / "junk.png"), ErrorCode::kDecodeFailure);
}

void write_entry(const fs::path& dir, const std::string& id, int size_attn, int size_clus) {
  io::write_attention(AttentionStack{{FloatPlane::Random(size_attn, size_attn)}}, dir / (id + ".attn.plane"));
  io::write_clusters(ClusterMap{LabelPlane::Zero(size_clus, size_clus)}, dir / (id + ".clus.plane"));
}

TEST(LoadGroup, ThreeImagesSortedById) {
  TempDir dir;
  for (const char* id : {"c", "a", "b"}) write_entry(dir.path(), id, 8, 8);
  const GroupBundle bundle = io::load_group(dir.path());
  ASSERT_EQ(bundle.entries.size(), 3u);
  EXPECT_EQ(bundle.entries[0].image_id, "a");
  EXPECT_EQ(bundle.entries[2].image_id, "c");
  EXPECT_FALSE(bundle.entries[0].ground_truth.has_value());
}

TEST(LoadGroup, MissingClusterSidecar) {
  TempDir dir;
  write_entry(dir.path(), "a", 8, 8);
  fs::remove(dir / "a.clus.plane");
  EXPECT_COSOD_ERROR(io::load_group(dir.path()), ErrorCode::kMissingSidecar);
}

TEST(LoadGroup, AttentionClusterSizeMismatch) {
  TempDir dir;
  write_entry(dir.path(), "a", 64, 32);
  EXPECT_COSOD_ERROR(io::load_group(dir.path()), ErrorCode::kDimMismatch);
}

TEST(LoadGroup, GroundTruthSizeMismatch) {
  TempDir dir;
  write_entry(dir.path(), "a", 8, 8);
  io::write_mask_png(BinaryMask::Constant(4, 4, true), dir / "a.gt.png");
  EXPECT_COSOD_ERROR(io::load_group(dir.path()), ErrorCode::kDimMismatch);
}

TEST(LoadGroup, EmptyDirectoryAndNoGroups) {
  TempDir dir;
  EXPECT_COSOD_ERROR(io::load_group(dir.path()), ErrorCode::kEmptyGroup);
  EXPECT_COSOD_ERROR(io::list_groups(dir.path()), ErrorCode::kNoGroups);
}

}  // namespace
}  // namespace cosod
