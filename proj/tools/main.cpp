#include <iostream>

#include "trifactor/cli.hpp"

int main(int argc, char** argv) { return trifactor::cli_main(argc, argv, std::cout, std::cerr); }
