#include "spheresync/cli.hpp"

int main(int argc, char** argv) { return spheresync::cli_dispatch(argc, argv); }
