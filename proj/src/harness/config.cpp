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

#include <fstream>

#include "cosod/error.hpp"
#include "cosod/harness.hpp"

namespace cosod::harness {

std::string_view to_string(pseudo::OverlapMode mode) {
  return mode == pseudo::OverlapMode::kImageArea ? "image-area" : "mask-area";
}

std::string_view to_string(pseudo::Fallback fallback) {
  return fallback == pseudo::Fallback::kHighestFrequency ? "highest-frequency" : "skip";
}

pseudo::OverlapMode parse_overlap_mode(std::string_view text) {
  if (text == "image-area") return pseudo::OverlapMode::kImageArea;
  if (text == "mask-area") return pseudo::OverlapMode::kMaskArea;
  throw Error(ErrorCode::kInvalidArgument, "unknown overlap mode '" + std::string(text) + "'");
}

pseudo::Fallback parse_fallback(std::string_view text) {
  if (text == "highest-frequency") return pseudo::Fallback::kHighestFrequency;
  if (text == "skip") return pseudo::Fallback::kSkip;
  throw Error(ErrorCode::kInvalidArgument, "unknown fallback '" + std::string(text) + "'");
}

void apply_config_json(const nlohmann::json& json, RunConfig& config) {
  if (!json.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
  try {
    for (const auto& [key, value] : json.items()) {
      if (key == "root") config.root = value.get<std::string>();
      else if (key == "out") config.out = value.get<std::string>();
      else if (key == "pred") config.pred_dir = value.get<std::string>();
      else if (key == "gt") config.gt_dir = value.get<std::string>();
      else if (key == "scores") config.scores = value.get<std::string>();
      else if (key == "top_k") config.pseudo.top_k = value.get<int>();
      else if (key == "overlap_mode") config.pseudo.overlap_mode = parse_overlap_mode(value.get<std::string>());
      else if (key == "min_pixel_fraction") config.pseudo.min_pixel_fraction = value.get<double>();
      else if (key == "fallback") config.pseudo.fallback = parse_fallback(value.get<std::string>());
      else if (key == "beta2") config.metric.beta2 = value.get<double>();
      else if (key == "alpha") config.metric.alpha = value.get<double>();
      else if (key == "lambda_sc") config.weights.lambda_sc = value.get<double>();
      else if (key == "lambda_u") config.weights.lambda_u = value.get<double>();
      else if (key == "lambda_d") config.weights.lambda_d = value.get<double>();
      else if (key == "eps") config.weights.eps = value.get<double>();
      else if (key == "gate_threshold") config.gate_threshold = value.get<double>();
      else if (key == "jobs") config.jobs = value.get<int>();
      else if (key == "seed") config.seed = value.get<std::uint64_t>();
      else if (key == "steps") config.steps = value.get<int>();
      else if (key == "freeze_student") config.freeze_student = value.get<bool>();
      else if (key == "uniform_confidence") config.uniform_confidence = value.get<bool>();
      else throw Error(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad config value: ") + e.what());
  }
}

RunConfig load_config_file(const fs::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  nlohmann::json json;
  try {
    json = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, path.string() + ": " + e.what());
  }
  apply_config_json(json, base);
  return base;
}

}  // namespace cosod::harness
