#include "seqa/cli.hpp"

int main(int argc, char** argv) { return seqa::cli::dispatch(argc, argv); }
