#include <iostream>

#include "vwnn/cli.hpp"

int main(int argc, char** argv) { return vwnn::cli::run_cli(argc, argv, std::cout, std::cerr); }
