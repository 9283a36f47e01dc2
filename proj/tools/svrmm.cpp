#include "svrmm/harness.hpp"

int main(int argc, char** argv) { return svrmm::cli::main(argc, argv); }
