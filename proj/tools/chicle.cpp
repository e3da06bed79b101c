#include "chicle/cli.hpp"

int main(int argc, char** argv) { return chicle::cli::main(argc, argv); }
