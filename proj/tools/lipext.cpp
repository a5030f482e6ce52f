#include <iostream>

#include "lipext/cli/commands.hpp"

int main(int argc, char** argv) { return lipext::cli::run(argc, argv, std::cout, std::cerr); }
