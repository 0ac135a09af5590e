#include <bictk/cli.hpp>

int main(int argc, char** argv) { return bictk::cli::run(argc, argv); }
