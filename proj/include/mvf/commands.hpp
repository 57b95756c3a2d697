#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace mvf::cli {

struct CommandArgs {
    std::string config_path; // empty: all defaults
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
};

/// Runs one subcommand (lorenz, predict, tune, infer, backtest). Progress goes
/// to `log`. Returns 0 when every output was written; otherwise prints one
/// line "error: <code>: <message>" to `err` and returns nonzero.
int run(const std::string& command, const CommandArgs& args, std::ostream& log, std::ostream& err);

} // namespace mvf::cli
