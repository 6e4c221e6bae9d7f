#include <iostream>

#include "cll/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cll::cli::run(args, std::cout, std::cerr);
}
