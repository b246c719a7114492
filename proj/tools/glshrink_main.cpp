#include "glshrink/cli.hpp"

int main(int argc, char** argv) { return glshrink::run_cli(argc, argv); }
