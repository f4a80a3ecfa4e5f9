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

#ifndef COSOD_TESTS_TEST_UTIL_HPP_
#define COSOD_TESTS_TEST_UTIL_HPP_

#include <atomic>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <unistd.h>

#include "cosod/error.hpp"
#include "cosod/tensor_io.hpp"

#define EXPECT_COSOD_ERROR(stmt, expected)                       \
  do {                                                           \
    try {                                                        \
      stmt;                                                      \
      ADD_FAILURE() << "no error thrown by " #stmt;              \
    } catch (const ::cosod::Error& e) {                               \
      EXPECT_EQ(e.code(), expected) << e.what();                 \
    }                                                            \
  } while (0)

namespace cosod::testing {

namespace fs = std::filesystem;

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("cosod_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

// Relative path -> file bytes for every regular file under root.
inline std::map<std::string, std::vector<std::uint8_t>> snapshot_tree(const fs::path& root) {
  std::map<std::string, std::vector<std::uint8_t>> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    files[fs::relative(entry.path(), root).generic_string()] = io::read_file_bytes(entry.path());
  }
  return files;
}

inline std::string read_text(const fs::path& path) {
  const auto bytes = io::read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

inline void write_text(const fs::path& path, const std::string& text) {
  io::write_file_bytes(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), path);
}

}  // namespace cosod::testing

#endif  // COSOD_TESTS_TEST_UTIL_HPP_
