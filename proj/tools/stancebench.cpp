#include <iostream>

#include "stancebench/cli.hpp"

int main(int argc, char** argv) { return stancebench::dispatch(argc, argv, std::cout, std::cerr); }
