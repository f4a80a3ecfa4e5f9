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

#ifndef COSOD_LOSSES_HPP_
#define COSOD_LOSSES_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cosod/error.hpp"
#include "cosod/metrics.hpp"
#include "cosod/types.hpp"

// Numeric kernels of the semi-supervised objective. Every reduction runs in
// a fixed sequential order so results are bit-stable.
namespace cosod::loss {

struct LossWeights {
  double lambda_sc = 0.1;
  double lambda_u = 1.0;
  double lambda_d = 0.95;
  double eps = 1e-6;

  void validate() const {
    if (!(eps > 0.0 && eps <= 1e-3)) throw Error(ErrorCode::kInvalidArgument, "eps must lie in (0, 1e-3]");
    if (!(lambda_d >= 0.0 && lambda_d <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "lambda_d must lie in [0, 1]");
    if (!std::isfinite(lambda_sc) || !std::isfinite(lambda_u)) {
      throw Error(ErrorCode::kInvalidArgument, "loss weights must be finite");
    }
  }
};

/// Upper bound on labeled and unlabeled batch sizes.
inline constexpr std::size_t kMaxBatch = 16;
/// Default confidence score at or above which an unlabeled sample joins the labeled pool.
inline constexpr double kDefaultGateThreshold = 0.9;

template <typename Scalar>
using Prototype = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using ParamVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct FeatureMap {
  std::vector<Plane<Scalar>> channels;
};

/// Soft IoU loss: 1 - (Σpt + eps) / (Σp + Σt - Σpt + eps).
template <typename DerivedP, typename DerivedT>
double iou_loss(const Eigen::ArrayBase<DerivedP>& pred, const Eigen::ArrayBase<DerivedT>& target, double eps = 1e-6) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw Error(ErrorCode::kDimMismatch, "iou_loss operands differ in size");
  }
  double inter = 0.0, sum_p = 0.0, sum_t = 0.0;
  for (Eigen::Index r = 0; r < pred.rows(); ++r) {
    for (Eigen::Index c = 0; c < pred.cols(); ++c) {
      const auto p = static_cast<double>(pred(r, c));
      const auto t = static_cast<double>(target(r, c));
      inter += p * t;
      sum_p += p;
      sum_t += t;
    }
  }
  return 1.0 - (inter + eps) / (sum_p + sum_t - inter + eps);
}

/// Per-channel weighted mean Σ(f·w)/Σw; zero vector when Σw = 0.
template <typename Scalar, typename DerivedW>
Prototype<Scalar> masked_avg_prototype(const FeatureMap<Scalar>& features, const Eigen::ArrayBase<DerivedW>& weight) {
  const auto channels = static_cast<Eigen::Index>(features.channels.size());
  Prototype<Scalar> proto = Prototype<Scalar>::Zero(channels);
  const Eigen::ArrayXXd w = weight.template cast<double>();
  const double total = w.sum();
  for (Eigen::Index k = 0; k < channels; ++k) {
    const auto& plane = features.channels[static_cast<std::size_t>(k)];
    if (plane.rows() != w.rows() || plane.cols() != w.cols()) {
      throw Error(ErrorCode::kDimMismatch, "feature channel and weight differ in size");
    }
    if (total == 0.0) continue;
    double acc = 0.0;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) acc += static_cast<double>(plane(r, c)) * w(r, c);
    proto(k) = static_cast<Scalar>(acc / total);
  }
  return proto;
}

/// Cosine similarity; 0 when either vector is zero.
template <typename DerivedA, typename DerivedB>
double cosine_similarity(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kLengthMismatch, "cosine operands differ in length");
  const double na = a.template cast<double>().norm();
  const double nb = b.template cast<double>().norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.template cast<double>().dot(b.template cast<double>()) / (na * nb);
}

/// Self-contrastive loss -log(cos_c + eps) - log(1 - cos_b + eps), where
/// cos_c compares the whole-input prototype with the foreground prototype and
/// cos_b with the background prototype.
template <typename Derived>
double sc_loss(const Eigen::MatrixBase<Derived>& proto, const Eigen::MatrixBase<Derived>& proto_fg,
               const Eigen::MatrixBase<Derived>& proto_bg, double eps = 1e-6) {
  const double cos_c = cosine_similarity(proto, proto_fg);
  const double cos_b = cosine_similarity(proto, proto_bg);
  return -std::log(cos_c + eps) - std::log(1.0 - cos_b + eps);
}

/// Mean IoU loss over the labeled batch plus lambda_sc times the mean SC term.
template <typename Scalar>
double supervised_loss(std::span<const Plane<Scalar>> preds, std::span<const BinaryMask> gts,
                       std::span<const double> sc_terms, double lambda_sc = 0.1, double eps = 1e-6) {
  if (preds.empty()) throw Error(ErrorCode::kEmptyBatch, "supervised batch is empty");
  if (gts.size() != preds.size() || sc_terms.size() != preds.size()) {
    throw Error(ErrorCode::kLengthMismatch, "supervised batch lists are not aligned");
  }
  double iou = 0.0, sc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    iou += iou_loss(preds[i], gts[i], eps);
    sc += sc_terms[i];
  }
  const auto n = static_cast<double>(preds.size());
  return iou / n + lambda_sc * (sc / n);
}

struct ConfidenceBatch {
  std::vector<double> raw;
  std::vector<double> weights;
};

/// weights = raw / Σraw; uniform when Σraw = 0.
inline ConfidenceBatch normalize_confidence(std::span<const double> raw) {
  ConfidenceBatch batch;
  batch.raw.assign(raw.begin(), raw.end());
  double total = 0.0;
  for (double g : raw) {
    if (!(g >= 0.0) || !std::isfinite(g)) {
      throw Error(ErrorCode::kInvalidArgument, "confidence scores must be finite and non-negative");
    }
    total += g;
  }
  batch.weights.reserve(raw.size());
  for (double g : raw) {
    batch.weights.push_back(total > 0.0 ? g / total : 1.0 / static_cast<double>(raw.size()));
  }
  return batch;
}

/// (1/|B_u|) Σ_j w_j · iou_loss(student_j, teacher_j).
template <typename Scalar>
double unsupervised_loss(std::span<const Plane<Scalar>> student, std::span<const Plane<Scalar>> teacher,
                         const ConfidenceBatch& confidence, double eps = 1e-6) {
  if (student.size() != teacher.size() || confidence.weights.size() != student.size()) {
    throw Error(ErrorCode::kLengthMismatch, "unsupervised batch lists are not aligned");
  }
  if (student.empty()) throw Error(ErrorCode::kEmptyBatch, "unsupervised batch is empty");
  double acc = 0.0;
  for (std::size_t j = 0; j < student.size(); ++j) {
    acc += confidence.weights[j] * iou_loss(student[j], teacher[j], eps);
  }
  return acc / static_cast<double>(student.size());
}

inline double total_loss(double supervised, double unsupervised, double lambda_u = 1.0) {
  return supervised + lambda_u * unsupervised;
}

/// teacher' = lambda_d * teacher + (1 - lambda_d) * student.
template <typename DerivedT, typename DerivedS>
ParamVector<typename DerivedT::Scalar> ema_update(const Eigen::MatrixBase<DerivedT>& teacher,
                                                  const Eigen::MatrixBase<DerivedS>& student, double lambda_d = 0.95) {
  using Scalar = typename DerivedT::Scalar;
  if (teacher.size() != student.size()) throw Error(ErrorCode::kLengthMismatch, "EMA operands differ in length");
  const auto keep = static_cast<Scalar>(lambda_d);
  const auto take = static_cast<Scalar>(1.0 - lambda_d);
  return keep * teacher + take * student.template cast<Scalar>();
}

/// Regression target of the confidence estimator: max F-measure of a prediction.
template <typename Derived>
double cen_target(const Eigen::ArrayBase<Derived>& pred, const BinaryMask& gt, double beta2 = 0.3) {
  return metrics::fbeta_max(pred, gt, beta2);
}

inline double cen_mse(std::span<const double> predicted, std::span<const double> targets) {
  if (predicted.empty()) throw Error(ErrorCode::kEmptyBatch, "cen_mse on empty lists");
  if (predicted.size() != targets.size()) throw Error(ErrorCode::kLengthMismatch, "cen_mse lists are not aligned");
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - targets[i];
    acc += d * d;
  }
  return acc / static_cast<double>(predicted.size());
}

struct PoolPartition {
  std::vector<std::size_t> high;
  std::vector<std::size_t> low;
};

/// Indices with score >= threshold go to `high`, the rest to `low`.
inline PoolPartition gate_unlabeled_pool(std::span<const double> scores, double threshold = kDefaultGateThreshold) {
  PoolPartition partition;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (scores[i] >= threshold ? partition.high : partition.low).push_back(i);
  }
  return partition;
}

}  // namespace cosod::loss

#endif  // COSOD_LOSSES_HPP_
