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

#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "cosod/error.hpp"
#include "cosod/harness.hpp"

namespace cosod::harness {
namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

BenchmarkRow summarize(const std::string& unit, std::span<const metrics::MetricReport> reports) {
  const auto mean = metrics::aggregate(reports);
  return {unit, reports.size(), mean.mae, mean.fbeta_max, mean.emeasure_max, mean.smeasure};
}

}  // namespace

BenchmarkTable build_table(const std::vector<UnitReports>& units) {
  BenchmarkTable table;
  std::vector<metrics::MetricReport> all;
  for (const auto& unit : units) {
    if (unit.reports.empty()) continue;
    table.rows.push_back(summarize(unit.unit, unit.reports));
    all.insert(all.end(), unit.reports.begin(), unit.reports.end());
  }
  if (!all.empty()) table.rows.push_back(summarize("all", all));
  return table;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string to_csv(const BenchmarkTable& table) {
  std::string out = "unit,images,mae,fbeta_max,emeasure_max,smeasure\r\n";
  for (const auto& row : table.rows) {
    out += csv_escape(row.unit) + ',' + std::to_string(row.images) + ',' + fixed6(row.mae) + ',' +
           fixed6(row.fbeta_max) + ',' + fixed6(row.emeasure_max) + ',' + fixed6(row.smeasure) + "\r\n";
  }
  return out;
}

std::string to_markdown(const BenchmarkTable& table) {
  std::string out = "| unit | images | MAE | Fβ max | Eφ max | Sα |\n|---|---:|---:|---:|---:|---:|\n";
  for (const auto& row : table.rows) {
    std::string unit = row.unit;
    for (std::size_t pos = 0; (pos = unit.find('|', pos)) != std::string::npos; pos += 2) unit.replace(pos, 1, "\\|");
    out += "| " + unit + " | " + std::to_string(row.images) + " | " + fixed6(row.mae) + " | " + fixed6(row.fbeta_max) +
           " | " + fixed6(row.emeasure_max) + " | " + fixed6(row.smeasure) + " |\n";
  }
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A bare line break yields an empty record, which is skipped.
    if (!(record.size() == 1 && record.front().empty())) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      if (field_started) throw Error(ErrorCode::kMalformedCsv, "quote inside unquoted field");
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::kMalformedCsv, "unterminated quoted field");
  if (field_started || !record.empty()) end_record();
  return records;
}

nlohmann::ordered_json pseudolabel_report(const pseudo::PseudoLabelResult& result,
                                          const pseudo::PseudoLabelConfig& config) {
  nlohmann::ordered_json report;
  report["group"] = result.group_name;
  report["config"] = {
      {"top_k", config.top_k},
      {"min_pixel_fraction", config.min_pixel_fraction},
      {"overlap_mode", to_string(config.overlap_mode)},
      {"fallback", to_string(config.fallback)},
  };
  auto& frequencies = report["frequencies"] = nlohmann::ordered_json::array();
  for (const auto& [category, count] : result.frequencies) {
    frequencies.push_back({{"category", category}, {"frequency", count}});
  }
  auto& images = report["images"] = nlohmann::ordered_json::array();
  for (const auto& image : result.images) {
    nlohmann::ordered_json entry;
    entry["image_id"] = image.image_id;
    entry["selected_category"] =
        image.category == pseudo::kNoCategory ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(image.category);
    entry["fallback_used"] = image.fallback_used;
    entry["otsu_threshold_bin"] = image.otsu_threshold_bin;
    entry["foreground_pixels"] = image.foreground_pixels;
    entry["mask_pixels"] = image.mask.count();
    auto& candidates = entry["candidates"] = nlohmann::ordered_json::array();
    for (const auto& c : image.candidates) {
      candidates.push_back({{"category", c.category}, {"frequency", c.frequency}, {"score", c.score}});
    }
    images.push_back(std::move(entry));
  }
  return report;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            task(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace cosod::harness
