#include <iostream>
#include <string>
#include <vector>

#include "mcc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return mcc::run_cli(args, std::cin, std::cout, std::cerr, mcc::color_from_environment());
}
