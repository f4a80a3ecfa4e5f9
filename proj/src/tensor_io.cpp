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

#include "cosod/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>

#include "cosod/error.hpp"

namespace cosod {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kBadHeader: return "BadHeader";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kTrailingData: return "TrailingData";
    case ErrorCode::kDimOverflow: return "DimOverflow";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kInvalidLabel: return "InvalidLabel";
    case ErrorCode::kWrongDtype: return "WrongDtype";
    case ErrorCode::kWrongColorType: return "WrongColorType";
    case ErrorCode::kUnsupportedBitDepth: return "UnsupportedBitDepth";
    case ErrorCode::kDecodeFailure: return "DecodeFailure";
    case ErrorCode::kMissingSidecar: return "MissingSidecar";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kEmptyGroup: return "EmptyGroup";
    case ErrorCode::kNoGroups: return "NoGroups";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMalformedCsv: return "MalformedCsv";
  }
  return "Unknown";
}

namespace io {
namespace {

namespace fs = std::filesystem;

std::uint32_t load_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32(std::uint32_t v, std::vector<std::uint8_t>& out) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

std::uint32_t checked_dim(Eigen::Index v, const char* what) {
  if (v <= 0 || static_cast<std::uint64_t>(v) > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kDimOverflow, std::string(what) + " out of range");
  }
  return static_cast<std::uint32_t>(v);
}

template <typename Scalar>
std::vector<std::uint8_t> encode(std::span<const Plane<Scalar>> planes, PlaneDtype dtype) {
  if (planes.empty()) throw Error(ErrorCode::kBadHeader, "no planes to encode");
  const auto rows = planes.front().rows();
  const auto cols = planes.front().cols();
  std::vector<std::uint8_t> out;
  out.reserve(kPlaneHeaderSize + planes.size() * static_cast<std::size_t>(rows * cols) * 4);
  out.insert(out.end(), std::begin(kPlaneMagic), std::end(kPlaneMagic));
  out.push_back(kPlaneVersion);
  out.push_back(static_cast<std::uint8_t>(dtype));
  out.push_back(0);
  out.push_back(0);
  store_u32(checked_dim(static_cast<Eigen::Index>(planes.size()), "n_planes"), out);
  store_u32(checked_dim(rows, "height"), out);
  store_u32(checked_dim(cols, "width"), out);
  for (const auto& plane : planes) {
    if (!same_shape(plane, rows, cols)) {
      throw Error(ErrorCode::kDimMismatch, "planes in one file must share dimensions");
    }
    // Row-major storage, so data() walks the payload order directly.
    for (Eigen::Index i = 0; i < plane.size(); ++i) {
      const Scalar v = plane.data()[i];
      if constexpr (std::is_floating_point_v<Scalar>) {
        if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "non-finite value in plane");
      }
      store_u32(std::bit_cast<std::uint32_t>(v), out);
    }
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_planes(std::span<const FloatPlane> planes) {
  return encode<float>(planes, PlaneDtype::kFloat32);
}

std::vector<std::uint8_t> encode_planes(std::span<const LabelPlane> planes) {
  return encode<std::int32_t>(planes, PlaneDtype::kInt32);
}

PlaneStack decode_planes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kPlaneMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "missing CSPL magic");
  }
  if (bytes.size() < kPlaneHeaderSize) throw Error(ErrorCode::kTruncated, "short header");
  const std::uint8_t version = bytes[4];
  const std::uint8_t dtype = bytes[5];
  if (version != kPlaneVersion) {
    throw Error(ErrorCode::kBadHeader, "unsupported version " + std::to_string(version));
  }
  if (dtype > static_cast<std::uint8_t>(PlaneDtype::kInt32)) {
    throw Error(ErrorCode::kBadHeader, "unknown dtype " + std::to_string(dtype));
  }
  if (bytes[6] != 0 || bytes[7] != 0) throw Error(ErrorCode::kBadHeader, "reserved field not zero");
  const std::uint64_t n_planes = load_u32(&bytes[8]);
  const std::uint64_t height = load_u32(&bytes[12]);
  const std::uint64_t width = load_u32(&bytes[16]);
  if (n_planes == 0 || height == 0 || width == 0) {
    throw Error(ErrorCode::kBadHeader, "zero-sized dimension");
  }
  // Each factor is < 2^32; bound the element count so the byte count fits in
  // a signed 64-bit Eigen::Index.
  const std::uint64_t per_plane = height * width;
  constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 40;
  if (per_plane > kMaxElements || n_planes > kMaxElements / per_plane) {
    throw Error(ErrorCode::kDimOverflow, "declared payload too large");
  }
  const std::uint64_t payload = n_planes * per_plane * 4;
  const std::uint64_t available = bytes.size() - kPlaneHeaderSize;
  if (available < payload) throw Error(ErrorCode::kTruncated, "payload shorter than header declares");
  if (available > payload) throw Error(ErrorCode::kTrailingData, "bytes after payload");

  const auto rows = static_cast<Eigen::Index>(height);
  const auto cols = static_cast<Eigen::Index>(width);
  const std::uint8_t* cursor = bytes.data() + kPlaneHeaderSize;

  auto read_stack = [&]<typename Scalar>(std::vector<Plane<Scalar>>& planes) {
    planes.reserve(static_cast<std::size_t>(n_planes));
    for (std::uint64_t p = 0; p < n_planes; ++p) {
      Plane<Scalar> plane(rows, cols);
      for (Eigen::Index i = 0; i < plane.size(); ++i, cursor += 4) {
        const Scalar v = std::bit_cast<Scalar>(load_u32(cursor));
        if constexpr (std::is_floating_point_v<Scalar>) {
          if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "non-finite value in payload");
        }
        plane.data()[i] = v;
      }
      planes.push_back(std::move(plane));
    }
  };

  if (dtype == static_cast<std::uint8_t>(PlaneDtype::kFloat32)) {
    std::vector<FloatPlane> planes;
    read_stack(planes);
    return planes;
  }
  std::vector<LabelPlane> planes;
  read_stack(planes);
  return planes;
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed for " + path.string());
  return bytes;
}

void write_file_bytes(std::span<const std::uint8_t> bytes, const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

PlaneStack read_plane_file(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_planes(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_plane_file(std::span<const FloatPlane> planes, const fs::path& path) {
  write_file_bytes(encode_planes(planes), path);
}

void write_plane_file(std::span<const LabelPlane> planes, const fs::path& path) {
  write_file_bytes(encode_planes(planes), path);
}

void write_plane_file(const FloatPlane& plane, const fs::path& path) {
  write_plane_file(std::span<const FloatPlane>(&plane, 1), path);
}

void write_plane_file(const LabelPlane& plane, const fs::path& path) {
  write_plane_file(std::span<const LabelPlane>(&plane, 1), path);
}

AttentionStack read_attention(const fs::path& path) {
  auto stack = read_plane_file(path);
  auto* planes = std::get_if<std::vector<FloatPlane>>(&stack);
  if (planes == nullptr) throw Error(ErrorCode::kWrongDtype, path.string() + ": expected f32 attention planes");
  return AttentionStack{std::move(*planes)};
}

ClusterMap read_clusters(const fs::path& path) {
  auto stack = read_plane_file(path);
  auto* planes = std::get_if<std::vector<LabelPlane>>(&stack);
  if (planes == nullptr) throw Error(ErrorCode::kWrongDtype, path.string() + ": expected i32 cluster plane");
  if (planes->size() != 1) {
    throw Error(ErrorCode::kBadHeader, path.string() + ": cluster file must hold exactly one plane");
  }
  ClusterMap clusters{std::move(planes->front())};
  if (clusters.labels.minCoeff() < 0) {
    throw Error(ErrorCode::kInvalidLabel, path.string() + ": negative category label");
  }
  return clusters;
}

void write_attention(const AttentionStack& stack, const fs::path& path) {
  write_plane_file(std::span<const FloatPlane>(stack.heads), path);
}

void write_clusters(const ClusterMap& clusters, const fs::path& path) {
  if (clusters.labels.size() > 0 && clusters.labels.minCoeff() < 0) {
    throw Error(ErrorCode::kInvalidLabel, "negative category label");
  }
  write_plane_file(clusters.labels, path);
}

namespace {

constexpr std::string_view kAttnSuffix = ".attn.plane";
constexpr std::string_view kClusSuffix = ".clus.plane";
constexpr std::string_view kGtSuffix = ".gt.png";

bool strip_suffix(const std::string& name, std::string_view suffix, std::string& stem) {
  if (name.size() <= suffix.size() || !name.ends_with(suffix)) return false;
  stem = name.substr(0, name.size() - suffix.size());
  return true;
}

}  // namespace

GroupBundle load_group(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, dir.string() + " is not a directory");

  std::set<std::string> attn_ids, clus_ids;
  for (const auto& item : fs::directory_iterator(dir)) {
    if (!item.is_regular_file()) continue;
    const std::string name = item.path().filename().string();
    std::string stem;
    if (strip_suffix(name, kAttnSuffix, stem)) attn_ids.insert(stem);
    else if (strip_suffix(name, kClusSuffix, stem)) clus_ids.insert(stem);
  }

  std::set<std::string> ids = attn_ids;
  ids.insert(clus_ids.begin(), clus_ids.end());
  if (ids.empty()) throw Error(ErrorCode::kEmptyGroup, dir.string() + " has no sidecar files");

  GroupBundle bundle;
  bundle.group_name = dir.filename().string();
  for (const auto& id : ids) {
    if (!attn_ids.contains(id)) {
      throw Error(ErrorCode::kMissingSidecar, dir.string() + ": " + id + std::string(kAttnSuffix) + " missing");
    }
    if (!clus_ids.contains(id)) {
      throw Error(ErrorCode::kMissingSidecar, dir.string() + ": " + id + std::string(kClusSuffix) + " missing");
    }
    GroupEntry entry;
    entry.image_id = id;
    entry.attention = read_attention(dir / (id + std::string(kAttnSuffix)));
    entry.clusters = read_clusters(dir / (id + std::string(kClusSuffix)));
    const auto rows = entry.attention.rows();
    const auto cols = entry.attention.cols();
    if (!same_shape(entry.clusters.labels, rows, cols)) {
      throw Error(ErrorCode::kDimMismatch,
                  dir.string() + ": " + id + " attention is " + std::to_string(rows) + "x" + std::to_string(cols) +
                      " but clusters are " + std::to_string(entry.clusters.rows()) + "x" +
                      std::to_string(entry.clusters.cols()));
    }
    const fs::path gt_path = dir / (id + std::string(kGtSuffix));
    if (fs::exists(gt_path)) {
      entry.ground_truth = read_mask_png(gt_path);
      if (!same_shape(*entry.ground_truth, rows, cols)) {
        throw Error(ErrorCode::kDimMismatch, dir.string() + ": " + id + " ground truth dimensions differ");
      }
    }
    bundle.entries.push_back(std::move(entry));
  }
  return bundle;
}

std::vector<fs::path> list_groups(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::kIo, root.string() + " is not a directory");
  std::vector<fs::path> groups;
  for (const auto& item : fs::directory_iterator(root)) {
    if (item.is_directory()) groups.push_back(item.path());
  }
  if (groups.empty()) throw Error(ErrorCode::kNoGroups, root.string() + " contains no group directories");
  std::sort(groups.begin(), groups.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return groups;
}

}  // namespace io
}  // namespace cosod
