#include <iostream>

#include "pathfolio/cli.hpp"

int main(int argc, char** argv) { return pathfolio::cli::run(argc, argv, std::cout, std::cerr); }
