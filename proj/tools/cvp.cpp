#include <iostream>

#include "cvp_cli.hpp"

int main(int argc, char** argv) { return cvp::cli::run(argc, argv, std::cout, std::cerr); }
