#include <iostream>
#include <string>
#include <vector>

#include "stabilizer/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return stabilizer::cli::run_cli(args, std::cout, std::cerr);
}
