#include "sparcs/cli.hpp"

int main(int argc, char** argv) { return sparcs::cli::run(argc, argv); }
