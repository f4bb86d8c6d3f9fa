#include "alasso/cli/app.hpp"

int main(int argc, char** argv) { return alasso::cli::main_entry(argc, argv); }
