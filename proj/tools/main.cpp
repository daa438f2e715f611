#include "zvar/cli.hpp"

int main(int argc, char** argv) { return zvar::run_main(argc, argv); }
