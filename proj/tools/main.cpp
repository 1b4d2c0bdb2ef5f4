#include "kgcounsel/cli.hpp"

int main(int argc, char** argv) { return kgcounsel::cli_run(argc, argv); }
