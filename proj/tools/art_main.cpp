#include "art/cli.hpp"

int main(int argc, char** argv) { return art::run_cli(argc, argv); }
