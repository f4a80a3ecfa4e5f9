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

#ifndef COSOD_TYPES_HPP_
#define COSOD_TYPES_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cosod {

// Row-major so that the in-memory layout matches the on-disk plane layout.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using FloatPlane = Plane<float>;
using LabelPlane = Plane<std::int32_t>;
using BinaryMask = Plane<bool>;

/// Per-image stack of transformer attention planes, one per head.
struct AttentionStack {
  std::vector<FloatPlane> heads;

  Eigen::Index rows() const { return heads.empty() ? 0 : heads.front().rows(); }
  Eigen::Index cols() const { return heads.empty() ? 0 : heads.front().cols(); }
  std::size_t num_heads() const { return heads.size(); }
};

/// Per-image plane of unsupervised category ids. Labels are non-negative;
/// the category count is one past the largest label.
struct ClusterMap {
  LabelPlane labels;

  Eigen::Index rows() const { return labels.rows(); }
  Eigen::Index cols() const { return labels.cols(); }
  std::int32_t num_categories() const {
    return labels.size() == 0 ? 0 : labels.maxCoeff() + 1;
  }
};

struct GroupEntry {
  std::string image_id;
  AttentionStack attention;
  ClusterMap clusters;
  std::optional<BinaryMask> ground_truth;
};

/// An image group. Entries are sorted by image id.
struct GroupBundle {
  std::string group_name;
  std::vector<GroupEntry> entries;
};

template <typename Derived>
bool same_shape(const Eigen::ArrayBase<Derived>& a, Eigen::Index rows, Eigen::Index cols) {
  return a.rows() == rows && a.cols() == cols;
}

template <typename A, typename B>
bool same_shape(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

}  // namespace cosod

#endif  // COSOD_TYPES_HPP_
