#include <iostream>

#include "mixeq/commands.hpp"

int main(int argc, char** argv) { return mixeq::run_cli(argc, argv, std::cout, std::cerr); }
