#include "cli.hpp"

int main(int argc, char** argv) { return graphparse::cli::run(argc, argv); }
