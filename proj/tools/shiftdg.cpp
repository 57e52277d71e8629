#include "cli_app.hpp"

int main(int argc, char** argv)
{
    return shiftdg::cli::run(argc, argv);
}
