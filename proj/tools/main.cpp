#include "tvdac/harness.hpp"

int main(int argc, char** argv) { return tvdac::cli_main(argc, argv); }
