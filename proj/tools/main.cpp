#include "cli.hpp"

int main(int argc, char** argv) { return specchain::cli::run(argc, argv); }
