#include "ksr/cli.hpp"

int main(int argc, char** argv) { return ksr::cli_main(argc, argv); }
