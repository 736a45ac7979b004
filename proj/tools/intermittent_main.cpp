#include <iostream>

#include "intermittent/harness.hpp"

int main(int argc, char** argv) { return intermittent::cli(argc, argv, std::cout, std::cerr); }
