#include <deconf/cli.hpp>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return deconf::cli::run(std::move(args));
}
