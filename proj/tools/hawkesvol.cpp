#include "hawkesvol/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    return hawkesvol::cli::run(args, std::cout, std::cerr);
}
