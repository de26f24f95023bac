// Experiment runner for the two-layer interface laboratory.
//
//   tli run --config cfg.json [--seed N] [--out DIR] [--workers N] [--experiment NAME]
//   tli kernel [--d D] [--out DIR]
//
// Exit codes: 0 pass, 1 failed acceptance predicate, 2 invalid config,
// 3 numerical failure.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "tli/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"two-layer reflected interface laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir, experiment;
    std::uint64_t seed = 0;
    int workers = 0;
    bool seed_set = false, out_set = false, workers_set = false, exp_set = false;

    CLI::App* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("--config", config_path, "config file")->required();
    run->add_option("--seed", seed, "override the seed")->each([&](const std::string&) { seed_set = true; });
    run->add_option("--out", out_dir, "override the output directory")->each([&](const std::string&) { out_set = true; });
    run->add_option("--workers", workers, "worker threads (0 = hardware)")->each([&](const std::string&) { workers_set = true; });
    run->add_option("--experiment", experiment, "override the experiment name")->each([&](const std::string&) { exp_set = true; });

    int kernel_d = 3;
    CLI::App* kernel = app.add_subcommand("kernel", "print C1, C2 and the variance bound table");
    kernel->add_option("--d", kernel_d, "dimension");
    kernel->add_option("--out", out_dir, "output directory (default: temporary print-only run)")
        ->each([&](const std::string&) { out_set = true; });

    CLI11_PARSE(app, argc, argv);

    tli::RunOverrides ov;
    if (seed_set) ov.seed = seed;
    if (out_set) ov.out_dir = out_dir;
    if (workers_set) ov.workers = workers;
    if (exp_set) ov.experiment = experiment;

    std::string message;
    int code = 0;
    if (run->parsed()) {
        code = tli::run_experiment_file(config_path, ov, &message);
    } else {
        tli::json cfg = tli::default_config("kernel");
        cfg["kernel"]["d"] = kernel_d;
        if (!out_set) cfg["out"] = ".tli-kernel-out";
        code = tli::run_experiment_json(cfg, ov, &message);
    }
    std::printf("%s\n", message.c_str());
    if (code != 0) std::fprintf(stderr, "exit code %d\n", code);
    return code;
}
