#include "dpdist/cli.hpp"

int main(int argc, char** argv) { return dpdist::cli::run(argc, argv); }
