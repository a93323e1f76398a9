#include <iostream>

#include "wbary/cli.hpp"

int main(int argc, char** argv) { return wbary::run_cli(argc, argv, std::cout, std::cerr); }
