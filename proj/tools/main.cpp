#include "optocav/cli.hpp"

int main(int argc, char** argv) { return optocav::cli_main(argc, argv); }
