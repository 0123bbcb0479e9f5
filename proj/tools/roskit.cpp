#include "roskit/cli.hpp"

int main(int argc, char** argv) { return roskit::cli::main_entry(argc, argv); }
