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

#include <array>

#include "cosod/error.hpp"
#include "cosod/harness.hpp"
#include "cosod/tensor_io.hpp"

namespace cosod::harness {
namespace {

constexpr std::array<const char*, 3> kGroupNames = {"bear", "hourglass", "kite"};

constexpr pseudo::CategoryId kBackground = 0;
constexpr pseudo::CategoryId kGround = 1;

std::string group_name(int g) {
  if (g < static_cast<int>(kGroupNames.size())) return kGroupNames[static_cast<std::size_t>(g)];
  return "group_" + std::to_string(g);
}

std::string image_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "img_%02d", i);
  return buf;
}

BinaryMask ellipse(int size, double cy, double cx, double ry, double rx) {
  BinaryMask mask(size, size);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const double dy = (r - cy) / ry, dx = (c - cx) / rx;
      mask(r, c) = dy * dy + dx * dx <= 1.0;
    }
  }
  return mask;
}

}  // namespace

std::vector<SyntheticGroupInfo> write_synthetic_dataset(const fs::path& root, const SyntheticOptions& options) {
  if (options.size < 16 || options.groups < 1 || options.images_per_group < 1 || options.heads < 1) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic dataset needs size >= 16 and positive counts");
  }
  const int size = options.size;
  Rng rng(options.seed);
  std::vector<SyntheticGroupInfo> info;

  for (int g = 0; g < options.groups; ++g) {
    const SyntheticGroupInfo group{group_name(g), 2 + 2 * g, kBackground};
    const fs::path dir = root / group.name;
    const int distractor_image = g % options.images_per_group;

    for (int i = 0; i < options.images_per_group; ++i) {
      const double cy = rng.uniform(size * 0.3, size * 0.7);
      const double cx = rng.uniform(size * 0.3, size * 0.7);
      const double ry = rng.uniform(size * 0.16, size * 0.25);
      const double rx = rng.uniform(size * 0.16, size * 0.25);
      const BinaryMask object = ellipse(size, cy, cx, ry, rx);
      // The cluster covers the object and may bleed one pixel past it.
      const double bleed = rng.uniform() < 0.5 ? 0.0 : 1.0;
      const BinaryMask segment = ellipse(size, cy, cx, ry + bleed, rx + bleed);

      ClusterMap clusters{LabelPlane::Constant(size, size, kBackground)};
      if (i % 2 == 0) clusters.labels.bottomRows(size / 6).setConstant(kGround);
      clusters.labels = segment.select(LabelPlane::Constant(size, size, group.foreground), clusters.labels);

      BinaryMask distractor = BinaryMask::Constant(size, size, false);
      if (options.distractors && i == distractor_image) {
        const int side = size / 8;
        const std::array<std::array<int, 2>, 4> corners = {
            {{1, 1}, {1, size - side - 1}, {size - side - 1, 1}, {size - side - 1, size - side - 1}}};
        for (const auto& [r0, c0] : corners) {
          const int r_lo = std::max(r0 - 1, 0), c_lo = std::max(c0 - 1, 0);
          const int r_hi = std::min(r0 + side + 1, size), c_hi = std::min(c0 + side + 1, size);
          if (!segment.block(r_lo, c_lo, r_hi - r_lo, c_hi - c_lo).any()) {
            distractor.block(r0, c0, side, side).setConstant(true);
            break;
          }
        }
        clusters.labels = distractor.select(LabelPlane::Constant(size, size, 100 + g), clusters.labels);
      }

      // Salient object high, distractor mid, everything else low.
      Plane<double> base(size, size);
      for (Eigen::Index p = 0; p < base.size(); ++p) {
        if (object.data()[p]) base.data()[p] = rng.uniform(0.75, 0.95);
        else if (distractor.data()[p]) base.data()[p] = rng.uniform(0.5, 0.6);
        else base.data()[p] = rng.uniform(0.04, 0.2);
      }
      AttentionStack attention;
      for (int h = 0; h < options.heads; ++h) {
        const double scale = rng.uniform(0.5, 2.0);
        const double offset = rng.uniform(-0.3, 0.3);
        FloatPlane head(size, size);
        for (Eigen::Index p = 0; p < head.size(); ++p) {
          head.data()[p] = static_cast<float>(scale * (base.data()[p] + rng.uniform(-0.04, 0.04)) + offset);
        }
        attention.heads.push_back(std::move(head));
      }

      const std::string id = image_id(i);
      io::write_attention(attention, dir / (id + ".attn.plane"));
      io::write_clusters(clusters, dir / (id + ".clus.plane"));
      if (options.ground_truth) io::write_mask_png(object, dir / (id + ".gt.png"));
    }
    info.push_back(group);
  }
  return info;
}

}  // namespace cosod::harness
