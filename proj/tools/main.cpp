// SPDX-License-Identifier: Apache-2.0
#include "tubemesh/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return tubemesh::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
