#include <iostream>

#include "casbridge/cli/cli.hpp"

int main(int argc, char** argv) {
    return casbridge::cli::run({argv + 1, argv + argc}, std::cin, std::cout, std::cerr);
}
