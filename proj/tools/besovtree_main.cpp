#include <iostream>

#include "besovtree/cli.hpp"

int main(int argc, char** argv) { return besovtree::cli::run(argc, argv, std::cout, std::cerr); }
