#include "psinar/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return psinar::cli::run_cli(argc, argv, std::cout, std::cerr);
}
