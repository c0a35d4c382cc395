#include <iostream>

#include "qdecide/cli_app.hpp"

int main(int argc, char** argv) {
    return qdecide::cli::run_cli(argc, argv, std::cout, std::cerr);
}
