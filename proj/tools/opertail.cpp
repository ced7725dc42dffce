#include <iostream>

#include "opertail/cli.hpp"

int main(int argc, char** argv) { return opertail::cli::run(argc, argv, std::cout, std::cerr); }
