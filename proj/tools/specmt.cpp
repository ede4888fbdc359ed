#include <iostream>

#include "specmt/cli.hpp"

int main(int argc, char** argv) {
  return specmt::cli::dispatch(argc, argv, std::cout, std::cerr);
}
