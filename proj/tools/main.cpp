#include "fuzzyheat/cli.hpp"

int main(int argc, char** argv) { return fuzzyheat::cli::run(argc, argv); }
