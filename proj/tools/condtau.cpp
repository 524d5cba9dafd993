#include "cli_app.hpp"

int main(int argc, char** argv) { return condtau::cli::run(argc, argv); }
