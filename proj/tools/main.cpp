#include "cdr/cli.hpp"

int main(int argc, char** argv) { return cdr::cli::run(argc, argv); }
