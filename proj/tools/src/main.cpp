// Apache License, Version 2.0, refer to LICENSE.txt

#include <iostream>

#include "raretype_cli/cli.hpp"

int main(int argc, char** argv) { return raretype::cli::run(argc, argv, std::cout, std::cerr); }
