#include <iostream>

#include "plangen/cli.hpp"

int main(int argc, char** argv) { return plangen::cli_dispatch(argc, argv, std::cout, std::cerr); }
