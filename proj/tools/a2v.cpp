#include "a2v/cli.hpp"

int main(int argc, char** argv) { return a2v::cli::run_cli(argc, argv); }
