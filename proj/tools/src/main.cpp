#include <iostream>

#include "adjopinf_cli/cli.hpp"

int main(int argc, char** argv) {
    return adjopinf::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
