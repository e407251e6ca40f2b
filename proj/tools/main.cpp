#include "redcut/cli.hpp"

int main(int argc, char** argv) { return redcut::run_cli(argc, argv); }
