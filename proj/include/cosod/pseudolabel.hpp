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

#ifndef COSOD_PSEUDOLABEL_HPP_
#define COSOD_PSEUDOLABEL_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "cosod/types.hpp"

namespace cosod::pseudo {

using CategoryId = std::int32_t;

/// Saliency values in [0,1].
using SaliencyMap = Plane<double>;

/// category id -> number of group images in which the category is present.
using FrequencyTable = std::map<CategoryId, int>;

enum class OverlapMode {
  kImageArea,  // |SM ∩ DM| / |I|
  kMaskArea,   // |SM ∩ DM| / |SM|
};

enum class Fallback {
  kHighestFrequency,
  kSkip,
};

struct PseudoLabelConfig {
  int top_k = 5;
  double min_pixel_fraction = 0.001;
  OverlapMode overlap_mode = OverlapMode::kImageArea;
  Fallback fallback = Fallback::kHighestFrequency;

  /// Throws kInvalidArgument if top_k < 1 or the fraction is outside [0,1).
  void validate() const;
};

inline constexpr int kHistogramBins = 256;

struct OtsuResult {
  BinaryMask mask;
  /// Foreground is every pixel whose bin index exceeds this value; -1 when degenerate.
  int threshold_bin = -1;
  bool degenerate = true;
};

struct OverlapScore {
  CategoryId category = 0;
  int frequency = 0;
  double score = 0.0;
};

inline constexpr CategoryId kNoCategory = -1;

struct ImageSelection {
  std::string image_id;
  /// kNoCategory when nothing was emitted.
  CategoryId category = kNoCategory;
  BinaryMask mask;
  /// Candidates in top-k order.
  std::vector<OverlapScore> candidates;
  bool fallback_used = false;
  int otsu_threshold_bin = -1;
  Eigen::Index foreground_pixels = 0;
};

struct PseudoLabelResult {
  std::string group_name;
  FrequencyTable frequencies;
  std::vector<ImageSelection> images;
};

/// Mean over heads followed by min-max normalisation. A constant mean plane
/// maps to all zeros.
SaliencyMap average_attention(const AttentionStack& stack);

/// 256-bin histogram bin of a [0,1] value.
inline int histogram_bin(double value) {
  const int bin = static_cast<int>(value * kHistogramBins);
  return bin < 0 ? 0 : (bin >= kHistogramBins ? kHistogramBins - 1 : bin);
}

/// Otsu threshold over a 256-bin histogram, lowest maximiser on ties. Inputs
/// occupying a single bin give an all-false mask flagged degenerate.
OtsuResult otsu_binarize(const SaliencyMap& saliency);

/// Categories whose pixel count reaches min_pixel_fraction * area (and is non-zero).
std::set<CategoryId> present_categories(const ClusterMap& clusters, double min_pixel_fraction);

FrequencyTable category_frequency(const GroupBundle& bundle, double min_pixel_fraction);

/// Sorted by (frequency desc, id asc) and truncated to k. Categories missing
/// from the table count as frequency 0.
std::vector<CategoryId> top_k_categories(const std::set<CategoryId>& image_categories,
                                         const FrequencyTable& frequencies, int k);

BinaryMask category_mask(const ClusterMap& clusters, CategoryId category);

double overlap_score(const BinaryMask& segment, const BinaryMask& foreground, OverlapMode mode);

PseudoLabelResult select_pseudo_masks(const GroupBundle& bundle, const PseudoLabelConfig& config);

}  // namespace cosod::pseudo

#endif  // COSOD_PSEUDOLABEL_HPP_
