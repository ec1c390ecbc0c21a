#include <iostream>

#include "physim_cli.hpp"

int main(int argc, char** argv) { return physim::cli::run(argc, argv, std::cout, std::cerr); }
