#include <iostream>

#include "cli_app.hpp"

int main(int argc, char** argv) { return pathgap::cli::run(argc, argv, std::cout, std::cerr); }
