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

#ifndef COSOD_METRICS_HPP_
#define COSOD_METRICS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <span>

#include "cosod/error.hpp"
#include "cosod/types.hpp"

namespace cosod::metrics {

inline constexpr int kThresholds = 256;

struct MetricConstants {
  double beta2 = 0.3;
  double alpha = 0.5;
  /// Weight of the dispersion term in the object similarity score.
  double object_lambda = 1.0;
  /// Added to the alignment denominator. Zero is safe: the denominator is
  /// positive whenever the ground truth is neither empty nor full.
  double emeasure_eps = 0.0;
};

struct MetricReport {
  double mae = 0.0;
  double fbeta_max = 0.0;
  double emeasure_max = 0.0;
  double smeasure = 0.0;
  std::array<double, kThresholds> precision{};
  std::array<double, kThresholds> recall{};
};

/// Binarisation level for threshold index t: pixel > t/255.
inline double threshold_level(int t) { return static_cast<double>(t) / 255.0; }

namespace detail {

template <typename Derived>
void check_shapes(const Eigen::ArrayBase<Derived>& pred, const BinaryMask& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
    throw Error(ErrorCode::kDimMismatch, "prediction and ground truth differ in size");
  }
}

struct Confusion {
  Eigen::Index tp = 0;
  Eigen::Index fp = 0;
  Eigen::Index fn = 0;
};

// Per-threshold confusion counts in one pass: a pixel with value v is
// positive for every t with v > t/255.
template <typename Derived>
std::array<Confusion, kThresholds> confusion_sweep(const Eigen::ArrayBase<Derived>& pred, const BinaryMask& gt) {
  std::array<Eigen::Index, kThresholds + 1> fg_hist{}, bg_hist{};
  for (Eigen::Index r = 0; r < pred.rows(); ++r) {
    for (Eigen::Index c = 0; c < pred.cols(); ++c) {
      const double v = static_cast<double>(pred(r, c));
      // Number of thresholds the pixel exceeds.
      int above = 0;
      if (v > 0.0) {
        above = std::min(kThresholds, static_cast<int>(std::ceil(v * 255.0)));
        // Correct for rounding in v*255 so that above == #{t : v > t/255}.
        while (above > 0 && !(v > threshold_level(above - 1))) --above;
        while (above < kThresholds && v > threshold_level(above)) ++above;
      }
      (gt(r, c) ? fg_hist : bg_hist)[static_cast<std::size_t>(above)]++;
    }
  }
  const Eigen::Index positives = gt.count();
  std::array<Confusion, kThresholds> sweep{};
  // Pixels with above > t are predicted positive at threshold t.
  Eigen::Index tp = 0, fp = 0;
  for (int t = kThresholds - 1; t >= 0; --t) {
    tp += fg_hist[static_cast<std::size_t>(t + 1)];
    fp += bg_hist[static_cast<std::size_t>(t + 1)];
    sweep[static_cast<std::size_t>(t)] = {tp, fp, positives - tp};
  }
  return sweep;
}

inline double ratio(Eigen::Index num, Eigen::Index den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// 2*mean / (mean^2 + 1 + 2*lambda*std) over the selected pixels; std uses
// the n-1 normaliser and is 0 for a single pixel.
template <typename Derived>
double object_similarity(const Eigen::ArrayBase<Derived>& values, const BinaryMask& region, double lambda) {
  const Eigen::Index n = region.count();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < region.rows(); ++i)
    for (Eigen::Index j = 0; j < region.cols(); ++j)
      if (region(i, j)) sum += static_cast<double>(values(i, j));
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (Eigen::Index i = 0; i < region.rows(); ++i)
    for (Eigen::Index j = 0; j < region.cols(); ++j)
      if (region(i, j)) sq += (static_cast<double>(values(i, j)) - mean) * (static_cast<double>(values(i, j)) - mean);
  const double sigma = n > 1 ? std::sqrt(sq / static_cast<double>(n - 1)) : 0.0;
  return 2.0 * mean / (mean * mean + 1.0 + 2.0 * lambda * sigma);
}

// Structural similarity of one block, as used by the region term.
template <typename DerivedP, typename DerivedG>
double block_ssim(const Eigen::ArrayBase<DerivedP>& pred, const Eigen::ArrayBase<DerivedG>& gt) {
  const Eigen::Index n = pred.size();
  const Eigen::ArrayXXd p = pred.template cast<double>();
  const Eigen::ArrayXXd g = gt.template cast<double>();
  const double x = p.mean();
  const double y = g.mean();
  const double norm = static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
  const double sigma_x = (p - x).square().sum() / norm;
  const double sigma_y = (g - y).square().sum() / norm;
  const double sigma_xy = ((p - x) * (g - y)).sum() / norm;
  const double a = 4.0 * x * y * sigma_xy;
  const double b = (x * x + y * y) * (sigma_x + sigma_y);
  if (a != 0.0) return b == 0.0 ? 0.0 : a / b;
  return b == 0.0 ? 1.0 : 0.0;
}

}  // namespace detail

template <typename Derived>
double mae(const Eigen::ArrayBase<Derived>& pred, const BinaryMask& gt) {
  detail::check_shapes(pred, gt);
  return (pred.template cast<double>() - gt.template cast<double>()).abs().mean();
}

/// Per-threshold precision and recall (0 where the denominator is 0).
template <typename Derived>
void precision_recall(const Eigen::ArrayBase<Derived>& pred, const BinaryMask& gt,
                      std::array<double, kThresholds>& precision, std::array<double, kThresholds>& recall) {
  detail::check_shapes(pred, gt);
  const auto sweep = detail::confusion_sweep(pred, gt);
  for (std::size_t t = 0; t < sweep.size(); ++t) {
    precision[t] = detail::ratio(sweep[t].tp, sweep[t].tp + sweep[t].fp);
    recall[t] = detail::ratio(sweep[t].tp, sweep[t].tp + sweep[t].fn);
  }
}

/// Maximum F-measure over the 256 thresholds. An empty ground truth scores 1
/// iff some threshold yields an empty prediction.
template <typename Derived>
double fbeta_max(const Eigen::ArrayBase<Derived>& pred, const BinaryMask& gt, double beta2 = 0.3) {
  detail::check_shapes(pred, gt);
  const auto sweep = detail::confusion_sweep(pred, gt);
  const bool gt_empty = gt.count() == 0;
  double best = 0.0;
  for (const auto& s : sweep) {
    if (gt_empty) {
      if (s.tp + s.fp == 0) return 1.0;
      continue;
    }
    if (s.tp == 0) continue;
    const double p = detail::ratio(s.tp, s.tp + s.fp);
    const double r = detail::ratio(s.tp, s.tp + s.fn);
    best = std::max(best, (1.0 + beta2) * p * r / (beta2 * p + r));
  }
  return best;
}

/// Enhanced-alignment measure of a binary prediction.
inline double emeasure_binary(const BinaryMask& pred, const BinaryMask& gt, double eps = 0.0) {
  const auto n = static_cast<double>(gt.size());
  const auto fg = gt.count();
  if (fg == 0) return 1.0 - static_cast<double>(pred.count()) / n;
  if (fg == gt.size()) return static_cast<double>(pred.count()) / n;
  const Eigen::ArrayXXd s = pred.cast<double>();
  const Eigen::ArrayXXd g = gt.cast<double>();
  const Eigen::ArrayXXd xi_s = s - s.mean();
  const Eigen::ArrayXXd xi_g = g - g.mean();
  const Eigen::ArrayXXd phi = 2.0 * xi_g * xi_s / (xi_g.square() + xi_s.square() + eps);
  return ((1.0 + phi).square() / 4.0).mean();
}

template <typename Derived>
double emeasure_max(const Eigen::ArrayBase<Derived>& pred, const BinaryMask& gt, double eps = 0.0) {
  detail::check_shapes(pred, gt);
  const Eigen::ArrayXXd p = pred.template cast<double>();
  double best = 0.0;
  for (int t = 0; t < kThresholds; ++t) {
    const BinaryMask s = p > threshold_level(t);
    best = std::max(best, emeasure_binary(s, gt, eps));
  }
  return best;
}

/// Structure measure: alpha * object + (1 - alpha) * region, clamped to [0,1].
template <typename Derived>
double smeasure(const Eigen::ArrayBase<Derived>& pred, const BinaryMask& gt, double alpha = 0.5,
                double object_lambda = 1.0) {
  detail::check_shapes(pred, gt);
  const Eigen::ArrayXXd p = pred.template cast<double>();
  const Eigen::Index rows = gt.rows(), cols = gt.cols();
  const Eigen::Index area = gt.size();
  const Eigen::Index fg = gt.count();
  if (fg == 0) return 1.0 - p.mean();
  if (fg == area) return p.mean();

  // Object term, weighted by integer pixel counts.
  const BinaryMask bg_region = !gt;
  const double o_fg = detail::object_similarity(p, gt, object_lambda);
  const double o_bg = detail::object_similarity(1.0 - p, bg_region, object_lambda);
  const double object =
      (static_cast<double>(fg) * o_fg + static_cast<double>(area - fg) * o_bg) / static_cast<double>(area);

  // Region term: split at the rounded 1-based foreground centroid; the left
  // and top blocks keep the centroid column and row.
  double sum_x = 0.0, sum_y = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      if (gt(r, c)) {
        sum_x += static_cast<double>(c + 1);
        sum_y += static_cast<double>(r + 1);
      }
  const auto split_x = static_cast<Eigen::Index>(std::round(sum_x / static_cast<double>(fg)));
  const auto split_y = static_cast<Eigen::Index>(std::round(sum_y / static_cast<double>(fg)));
  const Eigen::ArrayXXd g = gt.cast<double>();

  const std::array<std::array<Eigen::Index, 4>, 4> blocks = {{
      {0, 0, split_y, split_x},
      {0, split_x, split_y, cols - split_x},
      {split_y, 0, rows - split_y, split_x},
      {split_y, split_x, rows - split_y, cols - split_x},
  }};
  double region = 0.0;
  for (const auto& [r0, c0, h, w] : blocks) {
    if (h == 0 || w == 0) continue;
    region += static_cast<double>(h * w) * detail::block_ssim(p.block(r0, c0, h, w), g.block(r0, c0, h, w));
  }
  region /= static_cast<double>(area);

  const double score = alpha * object + (1.0 - alpha) * region;
  return std::clamp(score, 0.0, 1.0);
}

template <typename Derived>
MetricReport evaluate(const Eigen::ArrayBase<Derived>& pred, const BinaryMask& gt,
                      const MetricConstants& constants = {}) {
  MetricReport report;
  report.mae = mae(pred, gt);
  report.fbeta_max = fbeta_max(pred, gt, constants.beta2);
  report.emeasure_max = emeasure_max(pred, gt, constants.emeasure_eps);
  report.smeasure = smeasure(pred, gt, constants.alpha, constants.object_lambda);
  precision_recall(pred, gt, report.precision, report.recall);
  return report;
}

/// Unweighted mean of every field, in list order.
MetricReport aggregate(std::span<const MetricReport> reports);

}  // namespace cosod::metrics

#endif  // COSOD_METRICS_HPP_
