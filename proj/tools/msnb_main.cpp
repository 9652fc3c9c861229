#include <iostream>

#include "msnb/cli.hpp"

int main(int argc, char** argv) { return msnb::run_cli(argc, argv, std::cout, std::cerr); }
