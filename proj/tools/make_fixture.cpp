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

// Regenerates the synthetic fixture dataset used by the golden tests.

#include <iostream>

#include "CLI11.hpp"
#include "cosod/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic sidecar dataset"};
  std::string root;
  cosod::harness::SyntheticOptions options;
  app.add_option("--root", root, "Output dataset root")->required();
  app.add_option("--groups", options.groups);
  app.add_option("--images", options.images_per_group);
  app.add_option("--size", options.size);
  app.add_option("--heads", options.heads);
  app.add_option("--seed", options.seed);
  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& group : cosod::harness::write_synthetic_dataset(root, options)) {
      std::cout << group.name << ": foreground " << group.foreground << ", background " << group.background << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
