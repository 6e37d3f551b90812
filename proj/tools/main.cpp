#include "nh/cli.hpp"

int main(int argc, char** argv) { return nh::cli_dispatch(argc, argv); }
