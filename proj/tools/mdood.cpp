#include <iostream>
#include <string>
#include <vector>

#include "mdood/cli.hpp"

int main(int argc, char** argv) {
  return mdood::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
