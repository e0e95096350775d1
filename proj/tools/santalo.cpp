#include "santalo/cli.hpp"

int main(int argc, char** argv) { return santalo::cli::main(argc, argv); }
