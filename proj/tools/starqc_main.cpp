#include "starqc/cli.hpp"

int main(int argc, char** argv) { return starqc::run_cli(argc, argv); }
