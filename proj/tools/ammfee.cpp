#include "ammfee/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ammfee::runCli(argc, argv, std::cout, std::cerr); }
