#include <iostream>
#include <string>
#include <vector>

#include "crsh/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return crsh::run_cli(args, std::cout, std::cerr);
}
