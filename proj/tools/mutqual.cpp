#include "mutqual/cli.hpp"

int main(int argc, char** argv) { return mutqual::cli::run(argc, argv); }
