#include <iostream>

#include "linewidth/cli.hpp"

int main(int argc, char** argv) { return linewidth::cli::run(argc, argv, std::cout, std::cerr); }
