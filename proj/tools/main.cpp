#include <iostream>

#include "dps/cli.hpp"

int main(int argc, char** argv) { return dps::run_cli(argc, argv, std::cout, std::cerr); }
