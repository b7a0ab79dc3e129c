#include "gfbm/cli.hpp"

int main(int argc, char** argv) { return gfbm::cli::dispatch(argc, argv); }
