#include <iostream>

#include "eewiki/cli.h"

int main(int argc, char** argv) {
  return ee::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
