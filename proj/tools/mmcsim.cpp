#include "mmc/cli.hpp"

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv)
{
    return mmc::run_command(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
