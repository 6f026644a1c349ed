#include <iostream>
#include <string>
#include <vector>

#include "biot/biot.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return biot::cli::main_entry(args, std::cout, std::cerr);
}
