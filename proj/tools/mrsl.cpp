#include <iostream>
#include <string>
#include <vector>

#include "mrsl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mrsl::cli::dispatch(args, std::cout, std::cerr);
}
