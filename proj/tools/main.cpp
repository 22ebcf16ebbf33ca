#include "polysing/cli.hpp"

int main(int argc, char** argv) { return polysing::run_cli(argc, argv); }
