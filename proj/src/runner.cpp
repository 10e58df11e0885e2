#include "bpslam/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>

namespace bpslam {

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t run_seed(std::uint64_t base, std::size_t run_index) {
    return mix(mix(base) ^ static_cast<std::uint64_t>(run_index));
}

Scenario resolve_scenario(const RunConfig& cfg) {
    if (!cfg.scenario_path.empty()) return load_scenario(cfg.scenario_path);
    Scenario s = make_default_scenario(cfg.n_steps);
    s.generator = cfg.generator;
    s.true_sigma = cfg.gen_sigma;
    s.seed = cfg.seed;
    return s;
}

std::vector<std::vector<MeasurementFrame>> simulate_frames(const Scenario& scenario,
                                                           std::size_t n_steps,
                                                           std::uint64_t seed) {
    Rng rng(mix(seed));
    std::vector<std::vector<MeasurementFrame>> frames;
    frames.reserve(n_steps);
    for (std::size_t n = 0; n < n_steps; ++n) {
        frames.push_back(generate_frame(scenario, n, rng));
    }
    return frames;
}

}  // namespace

RunOutput execute_run(const Scenario& scenario, const RunConfig& cfg,
                      std::size_t run_index,
                      const std::vector<std::vector<MeasurementFrame>>* replay) {
    std::size_t n_steps = cfg.n_steps;
    if (replay != nullptr) {
        n_steps = replay->size();
    } else {
        n_steps = std::min(n_steps, scenario.trajectory.size());
    }

    std::vector<std::vector<MeasurementFrame>> generated;
    if (replay == nullptr) {
        generated = simulate_frames(scenario, n_steps, run_seed(cfg.seed, run_index));
        replay = &generated;
    }

    Filter filter(cfg.filter, scenario.plan, scenario.anchors.pa_positions,
                  scenario.trajectory.empty() ? Vec2{0.0, 0.0} : scenario.trajectory[0],
                  run_seed(cfg.seed ^ 0x51a9u, run_index));

    RunOutput out;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t n = 0; n < n_steps; ++n) {
        StepReport report;
        try {
            report = filter.step((*replay)[n]);
        } catch (const DivergenceError&) {
            out.diverged = true;
            out.diverged_at = n + 1;
            break;
        }
        out.agent_rows.push_back({run_index, report.n, report.agent_mmse.p.x,
                                  report.agent_mmse.p.y, report.agent_mmse.v.x,
                                  report.agent_mmse.v.y});
        for (std::size_t j = 0; j < report.features.size(); ++j) {
            for (const FeatureReport& f : report.features[j]) {
                out.feature_rows.push_back({run_index, report.n, j + 1, f.id,
                                            f.position.x, f.position.y, f.existence,
                                            f.detected});
            }
        }
        ++out.steps_run;
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                      .count();
    return out;
}

std::vector<MetricsRow> compute_metrics(const Scenario& scenario,
                                        const std::vector<AgentEstimateRow>& agents,
                                        const std::vector<FeatureRow>& features,
                                        std::size_t n_steps, const OspaParams& params) {
    const std::size_t num_pas = scenario.anchors.num_pas();
    std::vector<std::vector<Vec2>> truth_features(num_pas);
    for (std::size_t j = 0; j < num_pas; ++j) {
        truth_features[j] = scenario.anchors.features_of(j);
    }

    struct Cell {
        std::vector<double> sq_err;                   // per contributing run
        std::vector<std::vector<std::vector<Vec2>>> detected;  // [pa][run]
        std::vector<std::size_t> runs_seen;
    };
    std::map<std::size_t, Cell> by_step;
    for (const AgentEstimateRow& r : agents) {
        if (r.n < 1 || r.n > n_steps || r.n > scenario.trajectory.size()) continue;
        Cell& cell = by_step[r.n];
        if (cell.detected.empty()) cell.detected.resize(num_pas);
        const Vec2 truth = scenario.trajectory[r.n - 1];
        const double dx = r.x - truth.x;
        const double dy = r.y - truth.y;
        cell.sq_err.push_back(dx * dx + dy * dy);
        cell.runs_seen.push_back(r.run);
        for (std::size_t j = 0; j < num_pas; ++j) cell.detected[j].emplace_back();
    }
    for (const FeatureRow& f : features) {
        if (!f.detected || f.j < 1 || f.j > num_pas) continue;
        auto it = by_step.find(f.n);
        if (it == by_step.end()) continue;
        Cell& cell = it->second;
        for (std::size_t r = 0; r < cell.runs_seen.size(); ++r) {
            if (cell.runs_seen[r] == f.run) {
                cell.detected[f.j - 1][r].push_back({f.x, f.y});
                break;
            }
        }
    }

    std::vector<MetricsRow> rows;
    for (const auto& [n, cell] : by_step) {
        MetricsRow row;
        row.n = n;
        double mse = 0.0;
        for (double e : cell.sq_err) mse += e;
        const double n_runs = static_cast<double>(cell.sq_err.size());
        row.rmse = std::sqrt(mse / n_runs);
        double ospa_sum[2] = {0.0, 0.0};
        double count_sum[2] = {0.0, 0.0};
        for (std::size_t j = 0; j < num_pas && j < 2; ++j) {
            for (const auto& est : cell.detected[j]) {
                ospa_sum[j] += ospa(truth_features[j], est, params);
                count_sum[j] += static_cast<double>(est.size());
            }
        }
        row.ospa_pa1 = num_pas > 0 ? ospa_sum[0] / n_runs : 0.0;
        row.ospa_pa2 = num_pas > 1 ? ospa_sum[1] / n_runs : 0.0;
        row.n_detected_pa1 = num_pas > 0 ? count_sum[0] / n_runs : 0.0;
        row.n_detected_pa2 = num_pas > 1 ? count_sum[1] / n_runs : 0.0;
        rows.push_back(row);
    }
    return rows;
}

std::vector<SummaryStat> summarize(const std::vector<MetricsRow>& metrics) {
    std::vector<SummaryStat> stats;
    if (metrics.empty()) return stats;
    double rmse_sum = 0.0;
    for (const MetricsRow& r : metrics) rmse_sum += r.rmse;
    const MetricsRow& last = metrics.back();
    stats.push_back({"time_avg_rmse", rmse_sum / static_cast<double>(metrics.size())});
    stats.push_back({"final_mospa_pa1", last.ospa_pa1});
    stats.push_back({"final_mospa_pa2", last.ospa_pa2});
    stats.push_back({"mean_detected_pa1", last.n_detected_pa1});
    stats.push_back({"mean_detected_pa2", last.n_detected_pa2});
    return stats;
}

int run_experiment(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const Scenario scenario = resolve_scenario(cfg);
    fs::create_directories(cfg.out_dir);
    const auto path = [&](const char* name) { return (fs::path(cfg.out_dir) / name).string(); };

    if (cfg.mode == "simulate") {
        const std::size_t n_steps = std::min(cfg.n_steps, scenario.trajectory.size());
        save_scenario(scenario, path("scenario.json"));
        write_measurements_csv(path("measurements.csv"),
                               simulate_frames(scenario, n_steps, run_seed(cfg.seed, 1)));
        return 0;
    }

    if (cfg.mode == "evaluate") {
        const auto agents = parse_agent_estimates_csv(path("agent_estimates.csv"));
        const auto features = parse_features_csv(path("features.csv"));
        const auto metrics =
            compute_metrics(scenario, agents, features, cfg.n_steps, OspaParams{});
        if (metrics.empty()) {
            std::fprintf(stderr, "evaluate: no usable estimate rows\n");
            return 1;
        }
        write_metrics_csv(path("metrics.csv"), metrics);
        write_summary_csv(path("summary.csv"), summarize(metrics));
        return 0;
    }

    // mode == "run"
    std::vector<std::vector<MeasurementFrame>> replay;
    const bool has_replay = !cfg.measurements_path.empty();
    if (has_replay) {
        replay = parse_measurement_csv(cfg.measurements_path, scenario.anchors.num_pas());
    }

    std::vector<RunOutput> outputs(cfg.runs);
    RunConfig worker_cfg = cfg;
    if (cfg.runs > 1) worker_cfg.filter.parallel = false;
#pragma omp parallel for schedule(dynamic) if (cfg.runs > 1)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(cfg.runs); ++r) {
        outputs[r] = execute_run(scenario, worker_cfg, static_cast<std::size_t>(r) + 1,
                                 has_replay ? &replay : nullptr);
    }

    std::vector<AgentEstimateRow> agents;
    std::vector<FeatureRow> features;
    std::size_t diverged = 0;
    std::size_t n_steps = 0;
    for (const RunOutput& out : outputs) {
        agents.insert(agents.end(), out.agent_rows.begin(), out.agent_rows.end());
        features.insert(features.end(), out.feature_rows.begin(), out.feature_rows.end());
        n_steps = std::max(n_steps, out.steps_run);
        if (out.diverged) {
            ++diverged;
            std::fprintf(stderr, "run %zu: diverged at step %zu\n",
                         static_cast<std::size_t>(&out - outputs.data()) + 1,
                         out.diverged_at);
        }
    }

    save_scenario(scenario, path("scenario.json"));
    write_agent_estimates_csv(path("agent_estimates.csv"), agents);
    write_features_csv(path("features.csv"), features);
    if (scenario.trajectory.size() >= n_steps && !agents.empty()) {
        const auto metrics =
            compute_metrics(scenario, agents, features, n_steps, OspaParams{});
        write_metrics_csv(path("metrics.csv"), metrics);
        write_summary_csv(path("summary.csv"), summarize(metrics));
    }
    std::printf("runs: %zu  diverged: %zu  steps: %zu\n", outputs.size(), diverged,
                n_steps);
    return diverged == outputs.size() ? 1 : 0;
}

}  // namespace bpslam
