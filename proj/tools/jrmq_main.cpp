#include "jrmq/cli.hpp"

int main(int argc, char** argv) { return jrmq::run_cli(argc, argv); }
