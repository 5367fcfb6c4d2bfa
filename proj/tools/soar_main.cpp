#include "soar/cli.hpp"

int main(int argc, char** argv) { return soar::cli_main(argc, argv); }
