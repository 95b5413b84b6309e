#include <iostream>

#include "rnntlid/cli/cli.hpp"

int main(int argc, char** argv) { return rnntlid::run_cli(argc, argv, std::cout, std::cerr); }
