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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "cosod/error.hpp"
#include "cosod/harness.hpp"
#include "cosod/tensor_io.hpp"

// Student/teacher loop on synthetic data. Parameters are per-pixel logits of
// a 16x16 map and a "network" is f(x, θ) = sigmoid(θ + x), which is enough to
// drive every loss kernel and the EMA update with realistic shapes.
namespace cosod::harness {
namespace {

constexpr Eigen::Index kSide = 16;
constexpr double kStudentStep = 0.1;

using Image = Plane<double>;
using Params = loss::ParamVector<double>;

Image random_input(Rng& rng) {
  Image x(kSide, kSide);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-0.5, 0.5);
  return x;
}

Image forward(const Params& theta, const Image& input) {
  const Image logits = Eigen::Map<const Image>(theta.data(), kSide, kSide) + input;
  return 1.0 / (1.0 + (-logits).exp());
}

BinaryMask random_disk(Rng& rng) {
  constexpr int kMax = static_cast<int>(kSide) - 5;
  const int cy = rng.integer(4, kMax);
  const int cx = rng.integer(4, kMax);
  const int radius = rng.integer(2, 5);
  BinaryMask mask(kSide, kSide);
  for (Eigen::Index r = 0; r < kSide; ++r)
    for (Eigen::Index c = 0; c < kSide; ++c)
      mask(r, c) = (r - cy) * (r - cy) + (c - cx) * (c - cx) <= radius * radius;
  return mask;
}

Params random_params(Rng& rng, double lo, double hi) {
  Params p(kSide * kSide);
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.uniform(lo, hi);
  return p;
}

std::string format_row(int step, std::size_t n_l, std::size_t n_u, double sup, double unsup, double total,
                       const loss::ConfidenceBatch& conf, double gap, double ratio) {
  double sum = 0.0;
  for (double w : conf.weights) sum += w;
  const auto [lo, hi] = std::minmax_element(conf.weights.begin(), conf.weights.end());
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%d,%zu,%zu,%.12f,%.12f,%.12f,%.15f,%.12f,%.12f,%.12e,%.12f\n", step, n_l, n_u,
                sup, unsup, total, sum, *lo, *hi, gap, ratio);
  return buf;
}

}  // namespace

int cmd_ssloop_demo(const RunConfig& config, std::ostream& log) {
  try {
    config.weights.validate();
  } catch (const Error& e) {
    log << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (config.steps < 1) {
    log << "usage error: --steps must be >= 1\n";
    return kExitUsage;
  }
  if (config.out.empty()) {
    log << "usage error: --out is required\n";
    return kExitUsage;
  }

  Rng rng(config.seed);
  const Params target = random_params(rng, -3.0, 3.0);
  Params student = random_params(rng, -1.0, 1.0);
  Params teacher = student + random_params(rng, -2.0, 2.0);

  std::string csv =
      "step,n_labeled,n_unlabeled,supervised,unsupervised,total,weight_sum,weight_min,weight_max,teacher_gap,"
      "gap_ratio\n";
  for (int step = 0; step < config.steps; ++step) {
    const auto n_l = static_cast<std::size_t>(rng.integer(1, static_cast<int>(loss::kMaxBatch)));
    const auto n_u = static_cast<std::size_t>(rng.integer(1, static_cast<int>(loss::kMaxBatch)));

    // Labeled batch: predictions lean towards the ground truth.
    std::vector<Image> preds;
    std::vector<BinaryMask> gts;
    std::vector<double> sc_terms;
    for (std::size_t i = 0; i < n_l; ++i) {
      BinaryMask gt = random_disk(rng);
      const Image bias = gt.cast<double>() * 4.0 - 2.0;
      const Image input = random_input(rng) + bias;
      Image pred = forward(student, input);

      loss::FeatureMap<double> features;
      for (int k = 0; k < 4; ++k) features.channels.push_back(random_input(rng) + bias * (k % 2 == 0 ? 1.0 : -0.5));
      const auto proto = loss::masked_avg_prototype(features, Image::Ones(kSide, kSide));
      const auto proto_fg = loss::masked_avg_prototype(features, pred);
      const auto proto_bg = loss::masked_avg_prototype(features, 1.0 - pred);
      sc_terms.push_back(loss::sc_loss(proto, proto_fg, proto_bg, config.weights.eps));

      preds.push_back(std::move(pred));
      gts.push_back(std::move(gt));
    }

    // Unlabeled batch: teacher predictions are the targets.
    std::vector<Image> student_preds, teacher_preds;
    std::vector<double> raw;
    for (std::size_t j = 0; j < n_u; ++j) {
      const Image input = random_input(rng);
      student_preds.push_back(forward(student, input));
      teacher_preds.push_back(forward(teacher, input));
      const double g = rng.uniform();
      raw.push_back(config.uniform_confidence ? 0.5 : g);
    }
    const auto confidence = loss::normalize_confidence(raw);

    const double sup = loss::supervised_loss<double>(preds, gts, sc_terms, config.weights.lambda_sc,
                                                     config.weights.eps);
    const double unsup = loss::unsupervised_loss<double>(student_preds, teacher_preds, confidence, config.weights.eps);
    const double total = loss::total_loss(sup, unsup, config.weights.lambda_u);

    if (!config.freeze_student) student -= kStudentStep * (student - target);
    const double gap_before = (teacher - student).cwiseAbs().maxCoeff();
    teacher = loss::ema_update(teacher, student, config.weights.lambda_d);
    const double gap_after = (teacher - student).cwiseAbs().maxCoeff();
    const double ratio = gap_before == 0.0 ? 0.0 : gap_after / gap_before;

    csv += format_row(step, n_l, n_u, sup, unsup, total, confidence, gap_after, ratio);
  }

  io::write_file_bytes(std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()),
                       config.out / "ssloop.csv");
  log << "wrote " << config.steps << " steps to " << (config.out / "ssloop.csv").string() << '\n';
  return kExitOk;
}

}  // namespace cosod::harness
