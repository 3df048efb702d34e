#include <iostream>

#include "mvsel_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mvsel::cli::run(args, std::cout, std::cerr);
}
