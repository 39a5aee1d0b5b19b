#include "curemc/cli.hpp"

int main(int argc, char** argv) { return curemc::cli::main(argc, argv); }
