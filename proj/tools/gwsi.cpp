#include <iostream>
#include <string>
#include <vector>

#include "gwsi/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gwsi::cli::run(args, std::cout, std::cerr);
}
