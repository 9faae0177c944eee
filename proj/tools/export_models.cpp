// SPDX-License-Identifier: Apache-2.0
//
// Writes the reference model bundles into a directory.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "stockflow/models.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: stockflow-export <directory>\n";
    return 1;
  }
  std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  for (const auto& [file, bundle] : stockflow::models::bundles()) {
    std::ofstream out(dir / file, std::ios::binary);
    out << stockflow::emit_json(bundle);
    if (!out) {
      std::cerr << "cannot write " << (dir / file) << "\n";
      return 1;
    }
  }
  return 0;
}
