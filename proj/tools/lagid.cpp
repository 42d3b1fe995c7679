#include <iostream>

#include "lagid/cli.hpp"

int main(int argc, char** argv)
{
    return lagid::run_cli(argc, argv, std::cout, std::cerr);
}
