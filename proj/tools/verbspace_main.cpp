#include "verbspace/cli.hpp"

int main(int argc, char** argv) { return verbspace::run_cli(argc, argv); }
