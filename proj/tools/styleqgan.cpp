// SPDX-License-Identifier: Apache-2.0

#include <string>
#include <vector>

#include "sqg/cli.hpp"

int main(int argc, char** argv) {
  return sqg::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
