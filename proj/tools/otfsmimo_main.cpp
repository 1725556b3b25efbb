#include "otfsmimo/io.hpp"

int main(int argc, char** argv) { return otfsmimo::run_cli(argc, argv); }
