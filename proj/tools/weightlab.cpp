#include <iostream>
#include <string>
#include <vector>

#include "weightlab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return weightlab::run_cli(args, std::cout, std::cerr);
}
