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

// Command-line front end: pseudolabel, evaluate, ssloop-demo, gate-pool.

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "cosod/error.hpp"
#include "cosod/harness.hpp"

namespace {

using cosod::harness::RunConfig;

struct Flags {
  std::optional<std::string> config, root, out, pred, gt, scores;
  std::optional<int> top_k, jobs, steps;
  std::optional<std::string> overlap_mode, fallback;
  std::optional<double> min_pixel_fraction, beta2, alpha, lambda_sc, lambda_u, lambda_d, gate_threshold;
  std::optional<std::uint64_t> seed;
  bool freeze_student = false;
  bool uniform_confidence = false;
};

void add_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "JSON config; flags override its values");
  cmd.add_option("--root", f.root, "Dataset root with one directory per group");
  cmd.add_option("--out", f.out, "Output directory");
  cmd.add_option("--pred", f.pred, "Prediction PNG directory (evaluate)");
  cmd.add_option("--gt", f.gt, "Ground-truth PNG directory (evaluate)");
  cmd.add_option("--scores", f.scores, "CSV of id,score (gate-pool)");
  cmd.add_option("--top-k", f.top_k, "Candidate categories per image [5]");
  cmd.add_option("--overlap-mode", f.overlap_mode, "image-area | mask-area [image-area]");
  cmd.add_option("--min-pixel-fraction", f.min_pixel_fraction, "Presence floor as a fraction of image area [0.001]");
  cmd.add_option("--fallback", f.fallback, "highest-frequency | skip [highest-frequency]");
  cmd.add_option("--beta2", f.beta2, "F-measure beta^2 [0.3]");
  cmd.add_option("--alpha", f.alpha, "S-measure alpha [0.5]");
  cmd.add_option("--lambda-sc", f.lambda_sc, "Self-contrastive weight [0.1]");
  cmd.add_option("--lambda-u", f.lambda_u, "Unsupervised loss weight [1]");
  cmd.add_option("--lambda-d", f.lambda_d, "EMA decay [0.95]");
  cmd.add_option("--gate-threshold", f.gate_threshold, "Labeled-pool score threshold [0.9]");
  cmd.add_option("--jobs", f.jobs, "Worker threads [1]");
  cmd.add_option("--seed", f.seed, "Random seed [0]");
  cmd.add_option("--steps", f.steps, "Training steps (ssloop-demo) [20]");
  cmd.add_flag("--freeze-student", f.freeze_student, "Keep student parameters fixed (ssloop-demo)");
  cmd.add_flag("--uniform-confidence", f.uniform_confidence, "Equal raw confidence scores (ssloop-demo)");
}

RunConfig resolve(const Flags& f) {
  RunConfig c = f.config ? cosod::harness::load_config_file(*f.config) : RunConfig{};
  if (f.root) c.root = *f.root;
  if (f.out) c.out = *f.out;
  if (f.pred) c.pred_dir = *f.pred;
  if (f.gt) c.gt_dir = *f.gt;
  if (f.scores) c.scores = *f.scores;
  if (f.top_k) c.pseudo.top_k = *f.top_k;
  if (f.overlap_mode) c.pseudo.overlap_mode = cosod::harness::parse_overlap_mode(*f.overlap_mode);
  if (f.min_pixel_fraction) c.pseudo.min_pixel_fraction = *f.min_pixel_fraction;
  if (f.fallback) c.pseudo.fallback = cosod::harness::parse_fallback(*f.fallback);
  if (f.beta2) c.metric.beta2 = *f.beta2;
  if (f.alpha) c.metric.alpha = *f.alpha;
  if (f.lambda_sc) c.weights.lambda_sc = *f.lambda_sc;
  if (f.lambda_u) c.weights.lambda_u = *f.lambda_u;
  if (f.lambda_d) c.weights.lambda_d = *f.lambda_d;
  if (f.gate_threshold) c.gate_threshold = *f.gate_threshold;
  if (f.jobs) c.jobs = *f.jobs;
  if (f.seed) c.seed = *f.seed;
  if (f.steps) c.steps = *f.steps;
  if (f.freeze_student) c.freeze_student = true;
  if (f.uniform_confidence) c.uniform_confidence = true;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-saliency pseudo-label generation and evaluation"};
  app.require_subcommand(1);
  Flags flags;
  auto* pseudolabel = app.add_subcommand("pseudolabel", "Generate pseudo co-saliency masks for every group");
  auto* evaluate = app.add_subcommand("evaluate", "Score prediction PNGs against ground-truth PNGs");
  auto* ssloop = app.add_subcommand("ssloop-demo", "Run the student/teacher loss kernels on synthetic data");
  auto* gate = app.add_subcommand("gate-pool", "Split scored samples into labeled and unlabeled pools");
  for (auto* cmd : {pseudolabel, evaluate, ssloop, gate}) add_flags(*cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cosod::harness::kExitOk : cosod::harness::kExitUsage;
  }

  RunConfig config;
  try {
    config = resolve(flags);
  } catch (const cosod::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return e.code() == cosod::ErrorCode::kIo ? cosod::harness::kExitData : cosod::harness::kExitUsage;
  }

  try {
    if (pseudolabel->parsed()) return cosod::harness::cmd_pseudolabel(config, std::cerr);
    if (evaluate->parsed()) return cosod::harness::cmd_evaluate(config, std::cerr);
    if (ssloop->parsed()) return cosod::harness::cmd_ssloop_demo(config, std::cerr);
    return cosod::harness::cmd_gate_pool(config, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cosod::harness::kExitData;
  }
}
