#include "websft/cli.hpp"

int main(int argc, char** argv) { return websft::run_cli(argc, argv); }
