#include "cli.hpp"

int main(int argc, char** argv)
{
    return stvem::cli_main(argc, argv);
}
