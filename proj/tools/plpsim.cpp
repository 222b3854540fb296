#include <iostream>

#include "plpsim/cli.hpp"

int main(int argc, char** argv) { return plp::run_cli(argc, argv, std::cout, std::cerr); }
