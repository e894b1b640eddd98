#include <iostream>

#include "relstock/commands.hpp"

int main(int argc, char** argv) { return relstock::cli::run_cli(argc, argv, std::cout, std::cerr); }
