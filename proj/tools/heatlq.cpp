#include <iostream>

#include "halfline/cli.hpp"

int main(int argc, char** argv) {
  return halfline::cli::run(argc, argv, std::cout, std::cerr);
}
