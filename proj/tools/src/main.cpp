#include <iostream>

#include "ttsmt_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ttsmt::cli::run(args, std::cout, std::cerr);
}
