// SPDX-License-Identifier: Apache-2.0
#include <unistd.h>

#include <cstdlib>
#include <cstring>
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  const char* env = std::getenv("STOCKFLOW_COLOR");
  bool color = (env == nullptr || std::strcmp(env, "0") != 0) && isatty(STDERR_FILENO);
  std::vector<std::string> args(argv + 1, argv + argc);
  return stockflow::cli::run(args, std::cout, std::cerr, color);
}
