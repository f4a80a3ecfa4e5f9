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

#ifndef COSOD_TENSOR_IO_HPP_
#define COSOD_TENSOR_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "cosod/types.hpp"

namespace cosod::io {

// Plane file layout, all fields little-endian:
//   "CSPL" | u8 version=1 | u8 dtype | u16 reserved=0 | u32 n_planes | u32 height | u32 width
// followed by n_planes*height*width values, plane-major then row-major.
inline constexpr char kPlaneMagic[4] = {'C', 'S', 'P', 'L'};
inline constexpr std::uint8_t kPlaneVersion = 1;
inline constexpr std::size_t kPlaneHeaderSize = 20;

enum class PlaneDtype : std::uint8_t { kFloat32 = 0, kInt32 = 1 };

using PlaneStack = std::variant<std::vector<FloatPlane>, std::vector<LabelPlane>>;

PlaneStack decode_planes(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_planes(std::span<const FloatPlane> planes);
std::vector<std::uint8_t> encode_planes(std::span<const LabelPlane> planes);

/// Reads a plane file; the dtype tag selects which alternative is returned.
PlaneStack read_plane_file(const std::filesystem::path& path);

void write_plane_file(std::span<const FloatPlane> planes, const std::filesystem::path& path);
void write_plane_file(std::span<const LabelPlane> planes, const std::filesystem::path& path);
void write_plane_file(const FloatPlane& plane, const std::filesystem::path& path);
void write_plane_file(const LabelPlane& plane, const std::filesystem::path& path);

/// f32 file with n_planes >= 1.
AttentionStack read_attention(const std::filesystem::path& path);
/// i32 file with exactly one plane of non-negative labels.
ClusterMap read_clusters(const std::filesystem::path& path);

void write_attention(const AttentionStack& stack, const std::filesystem::path& path);
void write_clusters(const ClusterMap& clusters, const std::filesystem::path& path);

/// 8-bit grayscale PNG pixels.
Plane<std::uint8_t> read_gray_png(const std::filesystem::path& path);
/// Grayscale PNG with pixels >= 128 mapped to true.
BinaryMask read_mask_png(const std::filesystem::path& path);
/// Grayscale PNG scaled to [0,1] by 1/255.
FloatPlane read_prediction_png(const std::filesystem::path& path);

/// Deterministic encoder: unfiltered rows in stored deflate blocks, so the
/// output bytes depend only on the pixels.
std::vector<std::uint8_t> encode_gray_png(const Plane<std::uint8_t>& pixels);
void write_gray_png(const Plane<std::uint8_t>& pixels, const std::filesystem::path& path);
/// Writes 0/255 pixels.
void write_mask_png(const BinaryMask& mask, const std::filesystem::path& path);

/// Loads `<dir>/<id>.attn.plane`, `<id>.clus.plane` and optional `<id>.gt.png`.
GroupBundle load_group(const std::filesystem::path& dir);

/// Sorted subdirectories of a dataset root. Throws kNoGroups when there are none.
std::vector<std::filesystem::path> list_groups(const std::filesystem::path& root);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& path);

}  // namespace cosod::io

#endif  // COSOD_TENSOR_IO_HPP_
