#include "procmat/cli.hpp"

int main(int argc, char** argv) { return procmat::cli_main(argc, argv); }
