#include <CLI11.hpp>

#include "gridlang/config.hpp"
#include "gridlang/io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"gridlang: teacher-student emergent-language laboratory"};
    app.require_subcommand(1);
    CLI11_PARSE(app, argc, argv);
    return 0;
}
