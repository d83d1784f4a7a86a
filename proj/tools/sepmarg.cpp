#include "sepmarg/cli.hpp"

int main(int argc, char** argv) { return sepmarg::cli::run(argc, argv); }
