#include <iostream>

#include "wtcap/cli.hpp"

int main(int argc, char** argv) { return wtcap::cli::run(argc, argv, std::cout, std::cerr); }
