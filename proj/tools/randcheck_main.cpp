#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "randcheck/commands.hpp"
#include "randcheck/config.hpp"
#include "randcheck/errors.hpp"

int main(int argc, char** argv) {
    using namespace randcheck;

    CLI::App app{"Randomized-defense evaluation toolkit"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::string seed;
    std::string out;
    int workers = 0;
    std::vector<std::string> overrides;

    for (const std::string& name : command_names()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config,-c", config_path, "Config file (key = value with [sections], or JSON)");
        sub->add_option("--seed", seed, "Root seed, decimal or 0x hex; overrides the config");
        sub->add_option("--out,-o", out, "Output directory; overrides the config");
        sub->add_option("--workers,-j", workers, "Worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
        sub->add_option("--set", overrides, "Config override key=value (repeatable)");
    }
    app.get_subcommand("gen-data")->description("Generate the synthetic train/test datasets");
    app.get_subcommand("train")->description("Train a ReLU or kWTA network");
    app.get_subcommand("nag")->description("Repeated-query robustness curves for randomized smoothing");
    app.get_subcommand("smooth-compare")->description("PGD robust accuracy of random vs fixed smoothing noise");
    app.get_subcommand("sweep")->description("Subspace grid/random/PGD vulnerability sweep and obfuscation verdict");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    Config cfg;
    try {
        if (!config_path.empty()) cfg = Config::load(config_path);
        for (const std::string& o : overrides) cfg.set_override(o);
        if (!seed.empty()) cfg.set("seed", seed);
        if (!out.empty()) cfg.set("out", out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (workers == 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return run_command(command, cfg, workers, std::cout, std::cerr);
}
