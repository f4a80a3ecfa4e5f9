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

#ifndef COSOD_HARNESS_HPP_
#define COSOD_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cosod/losses.hpp"
#include "cosod/metrics.hpp"
#include "cosod/pseudolabel.hpp"

namespace cosod::harness {

namespace fs = std::filesystem;

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
};

struct RunConfig {
  fs::path root;
  fs::path out;
  fs::path pred_dir;
  fs::path gt_dir;
  fs::path scores;
  pseudo::PseudoLabelConfig pseudo;
  loss::LossWeights weights;
  metrics::MetricConstants metric;
  double gate_threshold = loss::kDefaultGateThreshold;
  int jobs = 1;
  std::uint64_t seed = 0;
  int steps = 20;
  bool freeze_student = false;
  bool uniform_confidence = false;
};

/// Overlays the keys present in a JSON object onto `config`. Keys mirror the
/// long CLI flag names with dashes replaced by underscores.
void apply_config_json(const nlohmann::json& json, RunConfig& config);
RunConfig load_config_file(const fs::path& path, RunConfig base = {});

std::string_view to_string(pseudo::OverlapMode mode);
std::string_view to_string(pseudo::Fallback fallback);
pseudo::OverlapMode parse_overlap_mode(std::string_view text);
pseudo::Fallback parse_fallback(std::string_view text);

struct BenchmarkRow {
  std::string unit;
  std::size_t images = 0;
  double mae = 0.0;
  double fbeta_max = 0.0;
  double emeasure_max = 0.0;
  double smeasure = 0.0;
};

/// One row per evaluated unit followed by an "all" row averaged over images.
struct BenchmarkTable {
  std::vector<BenchmarkRow> rows;
};

struct UnitReports {
  std::string unit;
  std::vector<metrics::MetricReport> reports;
};

BenchmarkTable build_table(const std::vector<UnitReports>& units);
std::string to_csv(const BenchmarkTable& table);
std::string to_markdown(const BenchmarkTable& table);

/// RFC-4180 fields; quoted when they contain a comma, quote or line break.
std::string csv_escape(std::string_view field);
/// RFC-4180 records. Throws kMalformedCsv on an unterminated quote.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

nlohmann::ordered_json pseudolabel_report(const pseudo::PseudoLabelResult& result,
                                          const pseudo::PseudoLabelConfig& config);

int cmd_pseudolabel(const RunConfig& config, std::ostream& log);
int cmd_evaluate(const RunConfig& config, std::ostream& log);
int cmd_ssloop_demo(const RunConfig& config, std::ostream& log);
int cmd_gate_pool(const RunConfig& config, std::ostream& log);

/// Runs `task(i)` for i in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task);

/// Portable deterministic generator: the raw engine output is fully specified
/// by the standard, the conversions below are ours.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi) {
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

struct SyntheticOptions {
  int groups = 3;
  int images_per_group = 4;
  int size = 32;
  int heads = 6;
  std::uint64_t seed = 7;
  bool ground_truth = true;
  /// Adds a small salient object seen in a single image.
  bool distractors = true;
};

struct SyntheticGroupInfo {
  std::string name;
  pseudo::CategoryId foreground = 0;
  pseudo::CategoryId background = 0;
};

/// Writes `<root>/<group>/<id>.attn.plane`, `.clus.plane` and `.gt.png`. In
/// every image the background category is disjoint from the salient region
/// and the foreground category overlaps it.
std::vector<SyntheticGroupInfo> write_synthetic_dataset(const fs::path& root, const SyntheticOptions& options);

}  // namespace cosod::harness

#endif  // COSOD_HARNESS_HPP_
