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

#include "cosod/pseudolabel.hpp"

#include <algorithm>
#include <array>

#include "cosod/error.hpp"

namespace cosod::pseudo {
namespace {

using u128 = unsigned __int128;
using i128 = __int128;

// Exact non-negative fraction; compared without overflow via quotient and
// remainder (denominators stay below 2^56 for supported image sizes).
struct Fraction {
  u128 num = 0;
  u128 den = 1;
};

int compare(const Fraction& a, const Fraction& b) {
  const u128 qa = a.num / a.den;
  const u128 qb = b.num / b.den;
  if (qa != qb) return qa < qb ? -1 : 1;
  const u128 lhs = (a.num % a.den) * b.den;
  const u128 rhs = (b.num % b.den) * a.den;
  if (lhs == rhs) return 0;
  return lhs < rhs ? -1 : 1;
}

constexpr Eigen::Index kMaxOtsuPixels = Eigen::Index{1} << 29;

}  // namespace

void PseudoLabelConfig::validate() const {
  if (top_k < 1) throw Error(ErrorCode::kInvalidArgument, "top_k must be >= 1");
  if (!(min_pixel_fraction >= 0.0 && min_pixel_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "min_pixel_fraction must lie in [0, 1)");
  }
}

SaliencyMap average_attention(const AttentionStack& stack) {
  SaliencyMap mean = SaliencyMap::Zero(stack.rows(), stack.cols());
  for (const auto& head : stack.heads) mean += head.cast<double>();
  mean /= static_cast<double>(stack.num_heads());

  const double lo = mean.minCoeff();
  const double hi = mean.maxCoeff();
  if (!(hi > lo)) return SaliencyMap::Zero(mean.rows(), mean.cols());
  return (mean - lo) / (hi - lo);
}

OtsuResult otsu_binarize(const SaliencyMap& saliency) {
  const Eigen::Index total = saliency.size();
  if (total >= kMaxOtsuPixels) throw Error(ErrorCode::kDimOverflow, "saliency map too large for Otsu");

  Plane<int> bins(saliency.rows(), saliency.cols());
  std::array<std::int64_t, kHistogramBins> histogram{};
  for (Eigen::Index i = 0; i < total; ++i) {
    bins.data()[i] = histogram_bin(saliency.data()[i]);
    ++histogram[static_cast<std::size_t>(bins.data()[i])];
  }

  std::int64_t weighted_total = 0;
  for (int b = 0; b < kHistogramBins; ++b) weighted_total += b * histogram[static_cast<std::size_t>(b)];

  // Between-class variance up to the constant factor 1/N^2:
  //   (s0*n1 - s1*n0)^2 / (n0*n1)
  // with bin indices as class values.
  OtsuResult result;
  Fraction best;
  std::int64_t n0 = 0, s0 = 0;
  for (int t = 0; t < kHistogramBins - 1; ++t) {
    n0 += histogram[static_cast<std::size_t>(t)];
    s0 += t * histogram[static_cast<std::size_t>(t)];
    const std::int64_t n1 = total - n0;
    const std::int64_t s1 = weighted_total - s0;
    if (n0 == 0 || n1 == 0) continue;
    const i128 diff = static_cast<i128>(s0) * n1 - static_cast<i128>(s1) * n0;
    const u128 magnitude = static_cast<u128>(diff < 0 ? -diff : diff);
    const Fraction value{magnitude * magnitude, static_cast<u128>(n0) * static_cast<u128>(n1)};
    if (result.degenerate || compare(value, best) > 0) {
      best = value;
      result.threshold_bin = t;
      result.degenerate = false;
    }
  }

  if (result.degenerate) {
    result.mask = BinaryMask::Constant(saliency.rows(), saliency.cols(), false);
  } else {
    result.mask = bins > result.threshold_bin;
  }
  return result;
}

std::set<CategoryId> present_categories(const ClusterMap& clusters, double min_pixel_fraction) {
  std::map<CategoryId, Eigen::Index> counts;
  const auto& labels = clusters.labels;
  for (Eigen::Index i = 0; i < labels.size(); ++i) ++counts[labels.data()[i]];

  const double floor = min_pixel_fraction * static_cast<double>(labels.size());
  std::set<CategoryId> present;
  for (const auto& [category, count] : counts) {
    if (count > 0 && static_cast<double>(count) >= floor) present.insert(category);
  }
  return present;
}

FrequencyTable category_frequency(const GroupBundle& bundle, double min_pixel_fraction) {
  FrequencyTable table;
  for (const auto& entry : bundle.entries) {
    for (CategoryId c : present_categories(entry.clusters, min_pixel_fraction)) ++table[c];
  }
  return table;
}

std::vector<CategoryId> top_k_categories(const std::set<CategoryId>& image_categories,
                                         const FrequencyTable& frequencies, int k) {
  auto frequency_of = [&](CategoryId c) {
    const auto it = frequencies.find(c);
    return it == frequencies.end() ? 0 : it->second;
  };
  std::vector<CategoryId> ordered(image_categories.begin(), image_categories.end());
  std::sort(ordered.begin(), ordered.end(), [&](CategoryId a, CategoryId b) {
    const int fa = frequency_of(a), fb = frequency_of(b);
    return fa != fb ? fa > fb : a < b;
  });
  if (k >= 0 && ordered.size() > static_cast<std::size_t>(k)) ordered.resize(static_cast<std::size_t>(k));
  return ordered;
}

BinaryMask category_mask(const ClusterMap& clusters, CategoryId category) {
  return clusters.labels == category;
}

double overlap_score(const BinaryMask& segment, const BinaryMask& foreground, OverlapMode mode) {
  if (!same_shape(segment, foreground)) throw Error(ErrorCode::kDimMismatch, "overlap masks differ in size");
  const auto intersection = static_cast<double>((segment && foreground).count());
  switch (mode) {
    case OverlapMode::kImageArea:
      return intersection / static_cast<double>(segment.size());
    case OverlapMode::kMaskArea: {
      const auto area = segment.count();
      return area == 0 ? 0.0 : intersection / static_cast<double>(area);
    }
  }
  return 0.0;
}

PseudoLabelResult select_pseudo_masks(const GroupBundle& bundle, const PseudoLabelConfig& config) {
  config.validate();
  PseudoLabelResult result;
  result.group_name = bundle.group_name;
  result.frequencies = category_frequency(bundle, config.min_pixel_fraction);

  for (const auto& entry : bundle.entries) {
    ImageSelection selection;
    selection.image_id = entry.image_id;

    const OtsuResult otsu = otsu_binarize(average_attention(entry.attention));
    selection.otsu_threshold_bin = otsu.threshold_bin;
    selection.foreground_pixels = otsu.mask.count();

    const auto present = present_categories(entry.clusters, config.min_pixel_fraction);
    const auto candidates = top_k_categories(present, result.frequencies, config.top_k);

    // Candidates are already in (frequency desc, id asc) order, so the first
    // strict maximum carries the tie-break.
    std::size_t winner = 0;
    double best = 0.0;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      const CategoryId c = candidates[j];
      const double score = overlap_score(category_mask(entry.clusters, c), otsu.mask, config.overlap_mode);
      selection.candidates.push_back({c, result.frequencies.at(c), score});
      if (score > best) {
        best = score;
        winner = j;
      }
    }

    if (best > 0.0) {
      selection.category = candidates[winner];
    } else {
      selection.fallback_used = true;
      if (config.fallback == Fallback::kHighestFrequency && !candidates.empty()) {
        selection.category = candidates.front();
      }
    }
    selection.mask = selection.category == kNoCategory
                         ? BinaryMask::Constant(entry.clusters.rows(), entry.clusters.cols(), false)
                         : category_mask(entry.clusters, selection.category);
    result.images.push_back(std::move(selection));
  }
  return result;
}

}  // namespace cosod::pseudo
