#include "commands.hpp"

int main(int argc, char** argv) { return cflab::cli::run(argc, argv); }
