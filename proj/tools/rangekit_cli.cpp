// Command-line front end: synth | curves | fisher | simulate | estimate |
// montecarlo, each driven by a key-value config file. Exit codes: 0 success,
// 2 configuration error, 3 numerical degeneracy.

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rangekit/rangekit.hpp"

namespace {

namespace fs = std::filesystem;
using namespace rangekit;

constexpr int kExitConfig = 2;
constexpr int kExitDegenerate = 3;

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;
};

ExperimentConfig load_config(const GlobalArgs& args)
{
    if (args.config_path.empty()) throw ConfigError("--config: a config file is required");
    std::string text;
    try {
        text = io::read_file(args.config_path);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("--config: ") + e.what());
    }
    ExperimentConfig cfg = ExperimentConfig::parse(text);
    if (args.seed_override) cfg.master_seed = *args.seed_override;
    return cfg;
}

int run(const GlobalArgs& args, void (*command)(const ExperimentConfig&, const fs::path&))
{
    try {
        const ExperimentConfig cfg = load_config(args);
        const fs::path out(args.out_dir);
        fs::create_directories(out);
        command(cfg, out);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DegenerateError& e) {
        std::cerr << "degeneracy: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const NoSignalError& e) {
        std::cerr << "degeneracy: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Band-limited ranging pulse design and two-reflector estimation"};
    app.require_subcommand(1);
    app.fallthrough(); // let `rangekit <cmd> --config ...` reach the global options

    GlobalArgs args;
    app.add_option("--config", args.config_path, "experiment config file")->required();
    app.add_option("--out", args.out_dir, "output directory (default .)");
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "override trials.master_seed");

    struct Command {
        const char* name;
        const char* help;
        void (*fn)(const ExperimentConfig&, const fs::path&);
    };
    const Command commands[] = {
        {"synth", "write the configured pulse (waveform CSV, coefficients, metadata)", &harness::run_synth},
        {"curves", "write the R(N) and R(d) figure-of-merit curves", &harness::run_curves},
        {"fisher", "write the Fisher information report", &harness::run_fisher},
        {"simulate", "write clean and noisy echoes for the scene", &harness::run_simulate},
        {"estimate", "run the configured estimator on a signal", &harness::run_estimate},
        {"montecarlo", "run the Monte Carlo sweep and write the summary CSV", &harness::run_montecarlo},
    };

    const Command* selected = nullptr;
    for (const auto& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->callback([&selected, &cmd] { selected = &cmd; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    if (seed_opt->count() > 0) args.seed_override = seed;
    return run(args, selected->fn);
}
