#include "runner/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Experiment runner for coupled parabolic inverse problems"};
    app.require_subcommand(1);

    pinv::cli::RunOptions options;
    std::uint64_t seed = 0;
    CLI::App* run = app.add_subcommand("run", "Run one experiment and write its artifacts");
    run->add_option("command", options.command, "Subcommand (defaults to the 'command' field of the config)")
        ->check(CLI::IsMember(pinv::cli::command_names()));
    run->add_option("--config", options.config_path, "JSON config file")->check(CLI::ExistingFile);
    run->add_option("--out", options.out_dir, "Output directory")->capture_default_str();
    auto* seed_opt = run->add_option("--seed", seed, "Random seed (overrides the config)");
    run->add_option("--workers", options.workers, "Worker threads for sweeps")->capture_default_str();
    run->add_option("--override", options.overrides, "KEY=VALUE with a dotted key (repeatable)");

    CLI::App* list = app.add_subcommand("list", "List the available subcommands");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pinv::cli::kError;
    }

    if (list->parsed()) {
        for (const auto& name : pinv::cli::command_names()) std::cout << name << '\n';
        return 0;
    }
    if (seed_opt->count() > 0) options.seed = seed;
    return pinv::cli::run(options, std::cerr);
}
