#include <iostream>

#include "dcrypps/cli.hpp"

int main(int argc, char** argv) { return dcrypps::run_cli(argc, argv, std::cout, std::cerr); }
