#include "cli.hpp"

int main(int argc, char** argv) { return wavegauge::cli::run(argc, argv); }
