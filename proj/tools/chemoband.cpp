#include "chemoband/cli/commands.hpp"

int main(int argc, char** argv)
{
    return chemoband::cli::run_cli(argc, argv);
}
