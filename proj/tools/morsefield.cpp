#include <iostream>

#include "morsefield/cli.hpp"

int main(int argc, char** argv) { return morsefield::run_cli(argc, argv, std::cout, std::cerr); }
