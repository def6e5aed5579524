#include <iostream>

#include "mibids/cli.hpp"

int main(int argc, char** argv) {
    return mibids::cli::run(argc, argv, std::cout, std::cerr);
}
