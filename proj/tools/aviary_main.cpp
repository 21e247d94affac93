#include "aviary/cli.hpp"

int main(int argc, char** argv) { return aviary::cli::run(argc, argv); }
