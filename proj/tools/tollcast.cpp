#include <iostream>

#include "tollcast/cli/app.hpp"

int main(int argc, char** argv) { return tollcast::cli::run(argc, argv, std::cout, std::cerr); }
