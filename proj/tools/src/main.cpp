#include <iostream>

#include "simm/cli.hpp"

int main(int argc, char** argv) {
    return simm::cli_dispatch(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
