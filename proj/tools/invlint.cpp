#include "invlint/cli.hpp"

int main(int argc, char** argv) { return invlint::run_cli(argc, argv); }
