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

#include <gtest/gtest.h>

#include "cosod/harness.hpp"
#include "cosod/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace cosod::metrics {
namespace {

using Map = Plane<double>;

// Random prediction whose values often sit exactly on threshold levels.
Map random_pred(harness::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Map p(rows, cols);
  const int style = rng.integer(0, 3);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    switch (style) {
      case 0: p.data()[i] = rng.uniform(); break;
      case 1: p.data()[i] = rng.integer(0, 255) / 255.0; break;
      case 2: p.data()[i] = rng.integer(0, 1); break;
      default: p.data()[i] = rng.integer(0, 4) / 4.0; break;
    }
  }
  return p;
}

BinaryMask random_gt(harness::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  const int style = rng.integer(0, 9);
  if (style == 0) return BinaryMask::Constant(rows, cols, false);
  if (style == 1) return BinaryMask::Constant(rows, cols, true);
  return oracle::random_mask(rng, rows, cols, rng.uniform(0.1, 0.9));
}

BinaryMask mixed_mask(harness::Rng& rng, int rows, int cols) {
  BinaryMask m = oracle::random_mask(rng, rows, cols);
  m(0, 0) = true;
  m(rows - 1, cols - 1) = false;
  return m;
}

TEST(Mae, Examples) {
  harness::Rng rng(1);
  const BinaryMask gt = mixed_mask(rng, 5, 6);
  EXPECT_EQ(mae(gt.cast<double>(), gt), 0.0);
  EXPECT_DOUBLE_EQ(mae(Map::Constant(5, 6, 0.5), gt), 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    const Map p = oracle::random_plane(rng, 4, 4);
    const BinaryMask g = oracle::random_mask(rng, 4, 4);
    EXPECT_NEAR(mae(p, g), oracle::mae(p, g), 1e-12);
  }
  EXPECT_COSOD_ERROR(mae(Map::Zero(2, 2), BinaryMask::Constant(2, 3, false)), ErrorCode::kDimMismatch);
}

TEST(Mae, JointComplementInvariant) {
  harness::Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Map p = oracle::random_plane(rng, 7, 5);
    const BinaryMask g = oracle::random_mask(rng, 7, 5);
    EXPECT_NEAR(mae(p, g), mae(1.0 - p, BinaryMask(!g)), 1e-12);
  }
}

TEST(Fbeta, Examples) {
  harness::Rng rng(3);
  const BinaryMask gt = mixed_mask(rng, 6, 6);
  EXPECT_EQ(fbeta_max(gt.cast<double>(), gt), 1.0);
  EXPECT_EQ(fbeta_max((!gt).cast<double>(), gt), 0.0);
  const BinaryMask empty = BinaryMask::Constant(3, 3, false);
  EXPECT_EQ(fbeta_max(Map::Constant(3, 3, 0.5), empty), 1.0);  // empty at T >= 0.5
  // Nothing in [0,1] exceeds T = 1, so an empty GT always scores 1.
  EXPECT_EQ(fbeta_max(Map::Constant(3, 3, 1.0), empty), 1.0);
  EXPECT_EQ(fbeta_max(Map::Constant(3, 3, 1.5), empty), 0.0);
}

TEST(Fbeta, RandomMatchesSweep) {
  harness::Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Map p = random_pred(rng, 4, 4);
    const BinaryMask g = random_gt(rng, 4, 4);
    EXPECT_NEAR(fbeta_max(p, g), oracle::fbeta_max(p, g, 0.3), 1e-12);
    EXPECT_NEAR(fbeta_max(p, g, 1.0), oracle::fbeta_max(p, g, 1.0), 1e-12);
  }
}

TEST(Fbeta, MonotoneUnderImprovement) {
  harness::Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Map p = random_pred(rng, 6, 6);
    const BinaryMask g = random_gt(rng, 6, 6);
    // Raise foreground pixels, lower background pixels.
    Map better = p;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double step = rng.uniform(0.0, 0.5);
      better.data()[i] = g.data()[i] ? std::min(1.0, p.data()[i] + step) : std::max(0.0, p.data()[i] - step);
    }
    EXPECT_GE(fbeta_max(better, g), fbeta_max(p, g));
  }
}

TEST(Emeasure, Examples) {
  harness::Rng rng(6);
  const BinaryMask gt = mixed_mask(rng, 6, 6);
  EXPECT_EQ(emeasure_max(gt.cast<double>(), gt), 1.0);
  const BinaryMask empty = BinaryMask::Constant(4, 4, false);
  EXPECT_EQ(emeasure_max(Map::Zero(4, 4), empty), 1.0);
  const BinaryMask full = BinaryMask::Constant(4, 4, true);
  EXPECT_EQ(emeasure_max(Map::Zero(4, 4), full), 0.0);
  EXPECT_EQ(emeasure_max(Map::Ones(4, 4), full), 1.0);
}

TEST(Emeasure, RandomMatchesPerPixelRecomputation) {
  harness::Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Map p = random_pred(rng, 4, 4);
    const BinaryMask g = random_gt(rng, 4, 4);
    EXPECT_NEAR(emeasure_max(p, g), oracle::emeasure_max(p, g), 1e-9);
  }
}

TEST(Smeasure, Examples) {
  harness::Rng rng(8);
  const BinaryMask gt = mixed_mask(rng, 8, 8);
  EXPECT_EQ(smeasure(gt.cast<double>(), gt), 1.0);
  const BinaryMask empty = BinaryMask::Constant(4, 4, false);
  EXPECT_EQ(smeasure(Map::Zero(4, 4), empty), 1.0);
  EXPECT_DOUBLE_EQ(smeasure(Map::Constant(4, 4, 0.25), empty), 0.75);
  EXPECT_DOUBLE_EQ(smeasure(Map::Constant(4, 4, 0.25), BinaryMask::Constant(4, 4, true)), 0.25);
}

TEST(Smeasure, RandomMatchesStraightLineImplementation) {
  harness::Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = rng.integer(1, 8), cols = rng.integer(1, 8);
    const Map p = random_pred(rng, rows, cols);
    const BinaryMask g = random_gt(rng, rows, cols);
    EXPECT_NEAR(smeasure(p, g), oracle::smeasure(p, g, 0.5, 1.0), 1e-9);
    EXPECT_NEAR(smeasure(p, g, 0.7, 0.5), oracle::smeasure(p, g, 0.7, 0.5), 1e-9);
  }
}

TEST(Smeasure, SinglePixelForeground) {
  BinaryMask g = BinaryMask::Constant(3, 3, false);
  g(1, 1) = true;
  const Map p = g.cast<double>();
  EXPECT_EQ(smeasure(p, g), 1.0);
  Map q = Map::Constant(3, 3, 0.1);
  q(1, 1) = 0.9;
  EXPECT_NEAR(smeasure(q, g), oracle::smeasure(q, g, 0.5, 1.0), 1e-12);
}

TEST(Curves, MatchSweepAndZeroDenominators) {
  harness::Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const Map p = random_pred(rng, 5, 5);
    const BinaryMask g = random_gt(rng, 5, 5);
    std::array<double, kThresholds> prec{}, rec{};
    precision_recall(p, g, prec, rec);
    for (int t = 0; t < kThresholds; ++t) {
      long tp = 0, fp = 0, fn = 0;
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        const bool on = p.data()[i] > t / 255.0;
        tp += on && g.data()[i];
        fp += on && !g.data()[i];
        fn += !on && g.data()[i];
      }
      const auto idx = static_cast<std::size_t>(t);
      EXPECT_DOUBLE_EQ(prec[idx], tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp));
      EXPECT_DOUBLE_EQ(rec[idx], tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn));
    }
  }
}

TEST(Report, RangesAndPerfectPrediction) {
  harness::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int rows = rng.integer(1, 10), cols = rng.integer(1, 10);
    const Map p = random_pred(rng, rows, cols);
    const BinaryMask g = random_gt(rng, rows, cols);
    const MetricReport r = evaluate(p, g);
    for (double v : {r.mae, r.fbeta_max, r.emeasure_max, r.smeasure}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(r.precision.size(), 256u);

    const MetricReport perfect = evaluate(g.cast<double>(), g);
    EXPECT_EQ(perfect.mae, 0.0);
    EXPECT_EQ(perfect.fbeta_max, 1.0);
    EXPECT_EQ(perfect.emeasure_max, 1.0);
    EXPECT_EQ(perfect.smeasure, 1.0);
  }
}

TEST(Report, FloatPredictionsMatchDouble) {
  harness::Rng rng(12);
  const Map p = random_pred(rng, 6, 6);
  const BinaryMask g = mixed_mask(rng, 6, 6);
  const FloatPlane pf = p.cast<float>();
  const Map back = pf.cast<double>();
  EXPECT_EQ(fbeta_max(pf, g), fbeta_max(back, g));
  EXPECT_EQ(smeasure(pf, g), smeasure(back, g));
}

TEST(Aggregate, Means) {
  MetricReport a, b;
  a.mae = 0.1;
  b.mae = 0.3;
  a.precision[7] = 1.0;
  const std::vector<MetricReport> one = {a};
  EXPECT_EQ(aggregate(one).mae, 0.1);
  const std::vector<MetricReport> two = {a, b};
  EXPECT_DOUBLE_EQ(aggregate(two).mae, 0.2);
  EXPECT_DOUBLE_EQ(aggregate(two).precision[7], 0.5);
  EXPECT_COSOD_ERROR(aggregate({}), ErrorCode::kEmptyBatch);

  harness::Rng rng(13);
  std::vector<MetricReport> many(9);
  double s = 0;
  for (auto& r : many) {
    r.smeasure = rng.uniform();
    s += r.smeasure;
  }
  EXPECT_NEAR(aggregate(many).smeasure, s / 9.0, 1e-15);
}

}  // namespace
}  // namespace cosod::metrics
