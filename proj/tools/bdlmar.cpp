#include "bdlmar/cli.hpp"

int main(int argc, char** argv) { return bdlmar::run_cli(argc, argv); }
