#include "tailcause/cli.hpp"

int main(int argc, char** argv) { return tailcause::cli::run(argc, argv); }
