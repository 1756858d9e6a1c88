#include <iostream>

#include "spintorus_cli/commands.hpp"

int main(int argc, char** argv) { return spintorus::cli::run_cli(argc, argv, std::cout, std::cerr); }
