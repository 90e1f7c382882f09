#include <iostream>
#include <string>
#include <vector>

#include "hice/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hice::run_cli(args, std::cout, std::cerr);
}
