#include "p2d2/cli.hpp"

int main(int argc, char** argv) { return p2d2::cli::main(argc, argv); }
