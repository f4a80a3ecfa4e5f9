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
#include <charconv>
#include <map>
#include <ostream>

#include "cosod/error.hpp"
#include "cosod/harness.hpp"
#include "cosod/tensor_io.hpp"

namespace cosod::harness {
namespace {

void write_text(const std::string& text, const fs::path& path) {
  io::write_file_bytes(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), path);
}

std::string read_text(const fs::path& path) {
  const auto bytes = io::read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

bool check_usage(bool ok, std::string_view message, std::ostream& log) {
  if (!ok) log << "usage error: " << message << '\n';
  return ok;
}

struct GroupOutcome {
  std::string name;
  std::string error;
  std::size_t images = 0;
  std::size_t fallbacks = 0;
  std::vector<metrics::MetricReport> reports;
};

}  // namespace

int cmd_pseudolabel(const RunConfig& config, std::ostream& log) {
  try {
    config.pseudo.validate();
  } catch (const Error& e) {
    log << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (!check_usage(!config.root.empty(), "--root is required", log) ||
      !check_usage(!config.out.empty(), "--out is required", log)) {
    return kExitUsage;
  }

  std::vector<fs::path> groups;
  try {
    groups = io::list_groups(config.root);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitData;
  }

  std::vector<GroupOutcome> outcomes(groups.size());
  parallel_for(groups.size(), config.jobs, [&](std::size_t g) {
    GroupOutcome& outcome = outcomes[g];
    outcome.name = groups[g].filename().string();
    try {
      const GroupBundle bundle = io::load_group(groups[g]);
      const auto result = pseudo::select_pseudo_masks(bundle, config.pseudo);
      for (std::size_t i = 0; i < result.images.size(); ++i) {
        const auto& image = result.images[i];
        io::write_mask_png(image.mask, config.out / "CM" / outcome.name / (image.image_id + ".png"));
        if (image.fallback_used) ++outcome.fallbacks;
        const auto& gt = bundle.entries[i].ground_truth;
        if (gt) outcome.reports.push_back(metrics::evaluate(image.mask.cast<float>(), *gt, config.metric));
      }
      write_text(pseudolabel_report(result, config.pseudo).dump(2) + "\n",
                 config.out / "reports" / (outcome.name + ".json"));
      outcome.images = result.images.size();
    } catch (const std::exception& e) {
      outcome.error = e.what();
    }
  });

  std::vector<UnitReports> units;
  bool failed = false;
  for (const auto& outcome : outcomes) {
    if (!outcome.error.empty()) {
      failed = true;
      log << "group " << outcome.name << " failed: " << outcome.error << '\n';
      continue;
    }
    log << "group " << outcome.name << ": " << outcome.images << " images, " << outcome.fallbacks
        << " fallbacks\n";
    units.push_back({outcome.name, outcome.reports});
  }

  const BenchmarkTable table = build_table(units);
  if (!table.rows.empty()) {
    write_text(to_csv(table), config.out / "benchmark.csv");
    write_text(to_markdown(table), config.out / "benchmark.md");
    log << to_markdown(table);
  }
  return failed ? kExitData : kExitOk;
}

namespace {

// "<dir>/<id>.gt.png" and "<dir>/<id>.png" share the key "<dir>/<id>.png".
std::string match_key(const fs::path& relative) {
  std::string key = relative.generic_string();
  constexpr std::string_view kGt = ".gt.png";
  if (key.ends_with(kGt)) key = key.substr(0, key.size() - kGt.size()) + ".png";
  return key;
}

std::map<std::string, fs::path> collect_pngs(const fs::path& dir) {
  std::map<std::string, fs::path> files;
  for (const auto& item : fs::recursive_directory_iterator(dir)) {
    if (!item.is_regular_file() || item.path().extension() != ".png") continue;
    files.emplace(match_key(fs::relative(item.path(), dir)), item.path());
  }
  return files;
}

}  // namespace

int cmd_evaluate(const RunConfig& config, std::ostream& log) {
  if (!check_usage(!config.pred_dir.empty(), "--pred is required", log) ||
      !check_usage(!config.gt_dir.empty(), "--gt is required", log) ||
      !check_usage(!config.out.empty(), "--out is required", log)) {
    return kExitUsage;
  }
  if (!fs::is_directory(config.pred_dir) || !fs::is_directory(config.gt_dir)) {
    log << "error: prediction and ground-truth directories must exist\n";
    return kExitData;
  }

  const auto preds = collect_pngs(config.pred_dir);
  const auto gts = collect_pngs(config.gt_dir);
  std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> pairs;
  for (const auto& [key, path] : preds) {
    const auto it = gts.find(key);
    if (it == gts.end()) log << "warning: no ground truth for prediction " << key << '\n';
    else pairs.push_back({key, {path, it->second}});
  }
  for (const auto& [key, path] : gts) {
    if (!preds.contains(key)) log << "warning: missing prediction for " << key << '\n';
  }
  if (pairs.empty()) {
    log << "error: no matching prediction/ground-truth files\n";
    return kExitData;
  }

  std::vector<metrics::MetricReport> reports(pairs.size());
  std::vector<std::string> errors(pairs.size());
  parallel_for(pairs.size(), config.jobs, [&](std::size_t i) {
    try {
      const FloatPlane pred = io::read_prediction_png(pairs[i].second.first);
      const BinaryMask gt = io::read_mask_png(pairs[i].second.second);
      reports[i] = metrics::evaluate(pred, gt, config.metric);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  std::map<std::string, std::vector<metrics::MetricReport>> by_unit;
  bool failed = false;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!errors[i].empty()) {
      failed = true;
      log << "error: " << pairs[i].first << ": " << errors[i] << '\n';
      continue;
    }
    const std::string parent = fs::path(pairs[i].first).parent_path().generic_string();
    by_unit[parent.empty() ? "." : parent].push_back(reports[i]);
  }
  std::vector<UnitReports> units;
  for (auto& [unit, unit_reports] : by_unit) units.push_back({unit, std::move(unit_reports)});

  const BenchmarkTable table = build_table(units);
  if (table.rows.empty()) return kExitData;
  write_text(to_csv(table), config.out / "evaluation.csv");
  write_text(to_markdown(table), config.out / "evaluation.md");
  log << to_markdown(table);
  return failed ? kExitData : kExitOk;
}

int cmd_gate_pool(const RunConfig& config, std::ostream& log) {
  if (!check_usage(!config.scores.empty(), "--scores is required", log) ||
      !check_usage(!config.out.empty(), "--out is required", log)) {
    return kExitUsage;
  }
  std::vector<std::string> ids;
  std::vector<double> scores;
  try {
    const auto records = parse_csv(read_text(config.scores));
    for (std::size_t r = 0; r < records.size(); ++r) {
      const auto& record = records[r];
      if (record.size() != 2) {
        throw Error(ErrorCode::kMalformedCsv, "record " + std::to_string(r + 1) + " does not have 2 fields");
      }
      const std::string& text = record[1];
      double score = 0.0;
      const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), score);
      if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
        if (r == 0) continue;  // header
        throw Error(ErrorCode::kMalformedCsv, "record " + std::to_string(r + 1) + " has a non-numeric score");
      }
      if (!(score >= 0.0 && score <= 1.0)) {
        throw Error(ErrorCode::kMalformedCsv, "record " + std::to_string(r + 1) + " score outside [0, 1]");
      }
      ids.push_back(record[0]);
      scores.push_back(score);
    }
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitData;
  }

  const auto partition = loss::gate_unlabeled_pool(scores, config.gate_threshold);
  auto join = [&](const std::vector<std::size_t>& indices) {
    std::string text;
    for (std::size_t i : indices) text += ids[i] + "\n";
    return text;
  };
  try {
    write_text(join(partition.high), config.out / "labeled.txt");
    write_text(join(partition.low), config.out / "unlabeled.txt");
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitData;
  }
  log << "labeled " << partition.high.size() << ", unlabeled " << partition.low.size() << '\n';
  return kExitOk;
}

}  // namespace cosod::harness
