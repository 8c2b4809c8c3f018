#include <iostream>

#include "ricon/tools/commands.hpp"

int main(int argc, char** argv) { return ricon::tools::run_cli(argc, argv, std::cout, std::cerr); }
