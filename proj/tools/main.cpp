#include <iostream>
#include <string>
#include <vector>

#include "simlane/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return simlane::cli::main(args, std::cout, std::cerr);
}
