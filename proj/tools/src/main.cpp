#include <iostream>

#include "dobc_cli/commands.hpp"

int main(int argc, char** argv) { return dobc::cli::run_cli(argc, argv, std::cout, std::cerr); }
