#include <iostream>

#include "lmtest/commands.hpp"

int main(int argc, char** argv) { return lmtest::cli::run(argc, argv, std::cout, std::cerr); }
