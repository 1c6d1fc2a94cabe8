#include <string>
#include <vector>

#include "shrinker/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return shrinker::run_cli(args);
}
