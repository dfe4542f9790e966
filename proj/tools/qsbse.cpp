#include "qsbse/cli.hpp"

int main(int argc, char** argv) { return qsbse::run_cli(argc, argv); }
