#include "mzsim/cli.hpp"

int main(int argc, char** argv) { return mzsim::cli_main(argc, argv); }
