#include <iostream>

#include "asmc/cli.hpp"

int main(int argc, char** argv) { return asmc::run_cli(argc, argv, std::cout, std::cerr); }
