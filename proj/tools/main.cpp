#include <string>
#include <vector>

#include "gpudvfs/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gpudvfs::cli::run_cli(args);
}
