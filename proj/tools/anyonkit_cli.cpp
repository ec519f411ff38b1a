#include <iostream>
#include <string>
#include <vector>

#include "anyonkit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  anyonkit::cli::CliResult res = anyonkit::cli::run(args);
  std::cout << res.out;
  std::cerr << res.err;
  return res.exitCode;
}
