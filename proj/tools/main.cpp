#include "pearsan/cli.hpp"

int main(int argc, char** argv) { return pearsan::cli::run_cli(argc, argv); }
