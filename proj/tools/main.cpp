#include "topolearn_cli/commands.hpp"

int main(int argc, char** argv) { return topolearn::cli::run(argc, argv); }
