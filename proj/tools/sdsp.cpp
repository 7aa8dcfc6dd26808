#include <iostream>

#include "sdsp/commands.hpp"

int main(int argc, char** argv) { return sdsp::run_cli(argc, argv, std::cout, std::cerr); }
