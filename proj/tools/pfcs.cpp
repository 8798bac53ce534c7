#include <iostream>

#include "pfcs/cli.hpp"

int main(int argc, char** argv) { return pfcs::cli::main(argc, argv, std::cout, std::cerr); }
