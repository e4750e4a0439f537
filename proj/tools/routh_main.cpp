#include <iostream>

#include "routh/app/commands.hpp"

int main(int argc, char** argv) { return routh::app::run(argc, argv, std::cout, std::cerr); }
