#include "cli.hpp"

int main(int argc, char **argv) { return eemimo::cli::main(argc, argv); }
