#include <vector>
#include <string>

#include "ccw/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ccw::run_cli(args);
}
