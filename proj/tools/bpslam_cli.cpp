#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "bpslam/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Belief-propagation multipath SLAM runner"};

    std::string config_path;
    std::string mode;
    std::string out_dir;
    std::size_t runs = 0;
    std::size_t particles = 0;
    std::uint64_t seed = 0;
    bool have_seed = false;

    app.add_option("--config", config_path, "JSON config file (schema bpslam-config/1)")
        ->check(CLI::ExistingFile);
    app.add_option("--mode", mode, "simulate, run, or evaluate")
        ->check(CLI::IsMember({"simulate", "run", "evaluate"}));
    app.add_option("--runs", runs, "number of independent runs");
    app.add_option("--particles", particles, "particle count (>= 100)");
    auto* seed_opt = app.add_option("--seed", seed, "base RNG seed");
    app.add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);
    have_seed = seed_opt->count() > 0;

    try {
        bpslam::RunConfig cfg;
        if (!config_path.empty()) cfg = bpslam::load_config(config_path);
        if (!mode.empty()) cfg.mode = mode;
        if (runs > 0) cfg.runs = runs;
        if (particles > 0) cfg.filter.n_particles = particles;
        if (have_seed) cfg.seed = seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (cfg.filter.n_particles < 100) {
            std::fprintf(stderr, "error: particles must be >= 100\n");
            return 2;
        }
        return bpslam::run_experiment(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
