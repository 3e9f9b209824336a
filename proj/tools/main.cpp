#include <iostream>

#include "kamtool.hpp"

int main(int argc, char **argv) { return kamtool::main_cli(argc, argv, std::cout, std::cerr); }
