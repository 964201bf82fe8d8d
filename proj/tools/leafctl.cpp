#include <iostream>

#include "leafctl/cli.hpp"

int main(int argc, char** argv) {
  return leafctl::cli::run(argc, argv, std::cin, std::cout, std::cerr);
}
