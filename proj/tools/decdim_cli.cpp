#include <iostream>

#include "decdim/cli.hpp"

int main(int argc, char** argv) { return decdim::cli::Run(argc, argv, std::cout, std::cerr); }
