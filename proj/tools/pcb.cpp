// CLI experiment runner.
//
//   pcb run --config configs/synth_f1.json --out out/f1 [--seed N] [--reps N]
//           [--plot] [--trace] [--threads N]

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pcbandit/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"continuum-armed bandit optimization with pairwise comparison oracles"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run an experiment suite from a JSON config");
    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int reps = 0, threads = 0;
    bool plot = false, trace = false;
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    auto* seed_opt = run->add_option("--seed", seed, "override the master seed");
    auto* reps_opt = run->add_option("--reps", reps, "override the replication count");
    run->add_option("--threads", threads, "worker threads (default: hardware concurrency)");
    run->add_flag("--plot", plot, "write plot.svg (mean relative regret vs T)");
    run->add_flag("--trace", trace, "write per-(cell,T) trace JSON for replication 0");

    CLI11_PARSE(app, argc, argv);

    try {
        pcb::ExperimentConfig cfg = pcb::load_config(config_path);
        pcb::ExperimentOptions opts;
        if (*seed_opt) opts.seed_override = seed;
        if (*reps_opt) opts.reps_override = reps;
        opts.plot = plot;
        opts.traces = trace;
        opts.threads = threads;
        pcb::run_experiment(cfg, out_dir, opts);
        std::cout << "wrote " << out_dir << "/results.csv and summary.csv\n";
    } catch (const pcb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
