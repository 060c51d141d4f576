#include <iostream>

#include "bartcs/cli.hpp"

int main(int argc, char** argv) { return bartcs::run_cli(argc, argv, std::cout, std::cerr); }
