#include "salut/cli.hpp"

int main(int argc, char** argv)
{
    return salut::cli::run_cli(argc, argv);
}
