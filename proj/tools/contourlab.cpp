#include <iostream>

#include "contourlab/cli.hpp"

int main(int argc, char** argv) { return contourlab::cli::run(argc, argv, std::cout, std::cerr); }
