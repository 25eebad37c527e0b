#include "zdl/cli.hpp"

int main(int argc, char** argv) { return zdl::cli::run(argc, argv); }
