#include "radarsim/cli.hpp"

int main(int argc, char** argv) { return radarsim::cli::run(argc, argv); }
