#include <iostream>

#include "milscreen/cli.hpp"

int main(int argc, char** argv) { return milscreen::cli::dispatch(argc, argv, std::cout, std::cerr); }
