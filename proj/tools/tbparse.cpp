#include <iostream>

#include "tbparse/cli.hpp"

int main(int argc, char** argv) { return tbparse::cli::run(argc, argv, std::cout, std::cerr); }
