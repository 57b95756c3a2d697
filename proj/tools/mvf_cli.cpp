// Command-line front end: mvf <lorenz|predict|tune|infer|backtest> --config <path> --out <dir>

#include <iostream>

#include <CLI11.hpp>

#include "mvf/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Multiview delay-embedding forecasting toolkit"};
    app.require_subcommand(1);

    mvf::cli::CommandArgs args;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    const std::pair<const char*, const char*> commands[] = {
        {"lorenz", "write a Lorenz-63 trajectory CSV"},
        {"predict", "multiview ensemble predictions and scatter plots"},
        {"tune", "cross-validate p, neighbor multiplier and trim fraction"},
        {"infer", "partition-resampling inference for the prediction correlation"},
        {"backtest", "market-timing backtest against buy and hold"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", args.config_path, "JSON config file (defaults are used when omitted)")
            ->check(CLI::ExistingFile);
        sub->add_option("--out", args.out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--threads", threads, "worker threads (results do not depend on it)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() != 0) {
            std::cerr << "error: usage: " << e.what() << '\n';
            return 2;
        }
        return app.exit(e);
    }

    auto* sub = app.get_subcommands().front();
    if (sub->count("--seed") > 0) {
        args.seed = seed;
    }
    if (sub->count("--threads") > 0) {
        args.threads = threads;
    }
    return mvf::cli::run(sub->get_name(), args, std::cout, std::cerr);
}
