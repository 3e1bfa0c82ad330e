#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "rdlab/harness/experiments.hpp"

namespace h = rdlab::harness;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> paths;
    std::optional<int> threads;
    std::optional<std::string> out;
    bool deterministic = false;
};

int run(const std::vector<std::string>& experiments, const Options& opt) {
    const h::Json document = opt.config.empty() ? h::default_document() : h::read_json_file(opt.config);
    h::RunOverrides overrides;
    overrides.seed = opt.seed;
    overrides.paths = opt.paths;
    overrides.threads = opt.threads;
    overrides.output = opt.out;
    if (opt.deterministic) overrides.deterministic_reduce = true;

    bool ok = true;
    for (const auto& name : experiments) {
        h::ExperimentConfig config = h::resolve_config(document, name);
        h::apply_overrides(config, overrides);
        const auto report = h::run_experiment(config);
        const auto dir = std::filesystem::path(config.output) / name;
        h::persist(report, dir);
        std::printf("[%s] %s in %.1f s -> %s\n", name.c_str(), report.passed() ? "PASS" : "FAIL",
                    report.wall_clock_seconds, dir.string().c_str());
        for (const auto& c : report.checks) {
            std::printf("  %s%s %s: %s\n", c.pass ? "ok  " : "FAIL", c.hard ? "" : " (soft)", c.name.c_str(),
                        c.detail.c_str());
        }
        ok = ok && report.passed();
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo experiments for truncated reaction-diffusion SPDEs"};
    app.require_subcommand(1);
    Options opt;
    std::uint64_t seed = 0;
    int paths = 0, threads = 0;
    std::string out;
    app.add_option("--config", opt.config, "JSON config file (defaults built in)")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "Base seed");
    auto* paths_opt = app.add_option("--paths", paths, "Paths per index")->check(CLI::Range(2, 1 << 24));
    auto* out_opt = app.add_option("--out", out, "Output directory");
    auto* threads_opt = app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));
    app.add_flag("--deterministic-reduce", opt.deterministic, "Reduce in path order");
    app.fallthrough();

    std::vector<std::string> selected;
    for (const auto& name : h::experiment_names()) {
        app.add_subcommand(name, "Run the " + name + " experiment")->callback([&selected, name] {
            selected = {name};
        });
    }
    app.add_subcommand("all", "Run every experiment")->callback([&selected] { selected = h::experiment_names(); });

    CLI11_PARSE(app, argc, argv);
    if (*seed_opt) opt.seed = seed;
    if (*paths_opt) opt.paths = paths;
    if (*threads_opt) opt.threads = threads;
    if (*out_opt) opt.out = out;

    try {
        return run(selected, opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
