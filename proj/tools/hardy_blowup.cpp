#include <iostream>

#include "hardy_blowup/cli.hpp"

int main(int argc, char** argv) { return hardy::cli::dispatch(argc, argv, std::cout, std::cerr); }
