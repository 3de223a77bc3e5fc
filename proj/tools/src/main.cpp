#include <iostream>

#include "blurgp/cli.hpp"

int main(int argc, char** argv) {
  return blurgp::cli::run(argc, argv, std::cout, std::cerr);
}
