#include "nclab/cli.hpp"

int main(int argc, char** argv) { return nclab::cli::main_entry(argc, argv); }
