#include "sicwer_cli.hpp"

int main(int argc, char** argv) { return sicwer::cli::run(argc, argv); }
