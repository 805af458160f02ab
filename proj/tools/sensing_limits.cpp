#include <iostream>

#include "sensing/cli.hpp"

int main(int argc, char** argv) { return sensing::cli::main(argc, argv, std::cout, std::cerr); }
