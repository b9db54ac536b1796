#include <iostream>

#include "jfa/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return jfa::cli::run(args, std::cout, std::cerr);
}
