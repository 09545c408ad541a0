#include <iostream>

#include "fairsteer_cli/cli.hpp"

int main(int argc, char** argv) { return fairsteer::cli::run(argc, argv, std::cout, std::cerr); }
