#include "kaf/cli.hpp"

#include <iostream>

int main(int argc, char **argv) {
  return kaf::cli::run(argc, argv, std::cout, std::cerr);
}
