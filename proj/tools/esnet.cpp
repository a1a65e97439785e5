#include "esnet/cli.hpp"

int main(int argc, char** argv) { return esnet::run_cli(argc, argv); }
