#include <iostream>
#include <string>
#include <vector>

#include "softbokeh/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return softbokeh::run_cli(args, std::cout, std::cerr);
}
