#pragma once

#include <vector>

#include "bpslam/io.hpp"
#include "bpslam/metrics.hpp"

namespace bpslam {

struct RunOutput {
    std::vector<AgentEstimateRow> agent_rows;
    std::vector<FeatureRow> feature_rows;
    bool diverged = false;
    std::size_t diverged_at = 0;  // time index of the divergence, if any
    std::size_t steps_run = 0;
    double seconds = 0.0;  // wall time spent in the filter loop
};

/// One filter execution with the run-derived seed. replay, when non-null,
/// supplies the measurement stream; otherwise it is generated from the
/// scenario. run_index is 1-based.
RunOutput execute_run(const Scenario& scenario, const RunConfig& cfg,
                      std::size_t run_index,
                      const std::vector<std::vector<MeasurementFrame>>* replay);

/// Per-step metrics across runs: RMSE over runs, per-PA OSPA of the detected
/// features against the true anchor map, mean detected counts. Diverged runs
/// simply contribute no rows.
std::vector<MetricsRow> compute_metrics(const Scenario& scenario,
                                        const std::vector<AgentEstimateRow>& agents,
                                        const std::vector<FeatureRow>& features,
                                        std::size_t n_steps, const OspaParams& params);

/// Summary statistics derived from the per-step metrics alone.
std::vector<SummaryStat> summarize(const std::vector<MetricsRow>& metrics);

/// Executes the configured mode and writes the artifact files into
/// cfg.out_dir. Returns 0 on success (including partial divergence), 1 if
/// every run diverged or the mode could not produce its artifacts.
int run_experiment(const RunConfig& cfg);

}  // namespace bpslam
