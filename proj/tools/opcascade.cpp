#include <csignal>

#include "cli.hpp"

namespace {
extern "C" void on_signal(int) { opcascade::cli::stop_requested().store(true); }
}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    return opcascade::cli::cli_main(argc, argv);
}
