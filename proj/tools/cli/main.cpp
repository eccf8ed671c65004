#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return refind::cli::run(argc, argv, std::cout, std::cerr); }
