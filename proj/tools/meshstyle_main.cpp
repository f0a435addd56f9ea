#include "meshstyle/cli.hpp"

int main(int argc, char** argv) { return meshstyle::run_cli(argc, argv); }
