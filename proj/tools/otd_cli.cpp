#include "otd/experiment.hpp"

#include <iostream>

#include "CLI11.hpp"

int main(int argc, char** argv) {
    CLI::App app{"optimal transport density solver"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run an experiment from a config file");
    std::string config_path, output_dir, mode_override;
    std::uint64_t seed = 0;
    bool seed_set = false;
    run->add_option("config", config_path, "path to JSON config")->required();
    run->add_option("--output-dir", output_dir, "override output directory");
    run->add_option("--mode-override", mode_override,
                    "override mode: flow|jko|sweep|oracle-check");
    run->add_option("--seed", seed, "override RNG seed")
        ->each([&](const std::string&) { seed_set = true; });

    CLI11_PARSE(app, argc, argv);

    try {
        otd::ExperimentConfig cfg = otd::load_config(config_path);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (seed_set) cfg.seed = seed;
        if (!mode_override.empty()) cfg.mode = otd::parse_mode(mode_override);
        return otd::run_experiment(cfg);
    } catch (const otd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return otd::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return otd::kExitNumerical;
    }
}
