#include <iostream>
#include <string>
#include <vector>

#include "nucrec_cli/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return nucrec::cli::dispatch(args, std::cout, std::cerr);
}
