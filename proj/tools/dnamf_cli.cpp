#include "cli_app.hpp"

int main(int argc, char** argv) { return dnamf::cli::run(argc, argv); }
