#include <iostream>

#include "pqr_cli/app.hpp"

int main(int argc, char** argv) { return pqr::cli::run(argc, argv, std::cout, std::cerr); }
