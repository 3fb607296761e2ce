#include "cli.hpp"

int main(int argc, char** argv) { return swsynth::run_cli(argc, argv); }
