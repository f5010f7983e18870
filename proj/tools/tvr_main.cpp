#include <iostream>

#include "tvr/cli.hpp"

int main(int argc, char** argv) { return tvr::cli::run(argc, argv, std::cout, std::cerr); }
