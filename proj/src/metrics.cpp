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

#include "cosod/metrics.hpp"

namespace cosod::metrics {

MetricReport aggregate(std::span<const MetricReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::kEmptyBatch, "cannot aggregate zero reports");
  MetricReport mean;
  for (const auto& r : reports) {
    mean.mae += r.mae;
    mean.fbeta_max += r.fbeta_max;
    mean.emeasure_max += r.emeasure_max;
    mean.smeasure += r.smeasure;
    for (int t = 0; t < kThresholds; ++t) {
      mean.precision[static_cast<std::size_t>(t)] += r.precision[static_cast<std::size_t>(t)];
      mean.recall[static_cast<std::size_t>(t)] += r.recall[static_cast<std::size_t>(t)];
    }
  }
  const auto n = static_cast<double>(reports.size());
  mean.mae /= n;
  mean.fbeta_max /= n;
  mean.emeasure_max /= n;
  mean.smeasure /= n;
  for (auto& v : mean.precision) v /= n;
  for (auto& v : mean.recall) v /= n;
  return mean;
}

}  // namespace cosod::metrics
