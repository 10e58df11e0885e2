#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpslam/engine.hpp"
#include "bpslam/sim.hpp"

namespace bpslam {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string mode = "run";  // simulate | run | evaluate
    std::string scenario_path;  // empty: built-in default scenario
    std::string measurements_path;  // optional replay input for mode=run
    std::string out_dir = "out";
    std::size_t runs = 1;
    std::size_t n_steps = 900;
    std::uint64_t seed = 1;
    FilterParams filter;
    SensorModel generator;  // measurement-generation model
    double gen_sigma = 0.1;
};

/// JSON config with a versioned "schema" key; unknown keys ignored, absent
/// keys keep their defaults.
RunConfig load_config(const std::string& path);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

/// measurements.csv rows (n, j, z, sigma); n and j are 1-based.
void write_measurements_csv(const std::string& path,
                            const std::vector<std::vector<MeasurementFrame>>& frames);

/// Rows grouped into [n-1][j-1] frames; missing (n, j) pairs yield empty
/// frames, out-of-order rows are sorted. Malformed rows and invalid sigma or
/// j raise ParseError with the line number.
std::vector<std::vector<MeasurementFrame>> parse_measurement_csv(
    const std::string& path, std::size_t num_pas);

struct AgentEstimateRow {
    std::size_t run = 0;
    std::size_t n = 0;
    double x = 0.0, y = 0.0, vx = 0.0, vy = 0.0;
};

struct FeatureRow {
    std::size_t run = 0;
    std::size_t n = 0;
    std::size_t j = 0;
    int feature_id = 0;
    double x = 0.0, y = 0.0;
    double p_exist = 0.0;
    bool detected = false;
};

struct MetricsRow {
    std::size_t n = 0;
    double rmse = 0.0;
    double ospa_pa1 = 0.0;
    double ospa_pa2 = 0.0;
    double n_detected_pa1 = 0.0;
    double n_detected_pa2 = 0.0;
};

void write_agent_estimates_csv(const std::string& path,
                               const std::vector<AgentEstimateRow>& rows);
std::vector<AgentEstimateRow> parse_agent_estimates_csv(const std::string& path);

void write_features_csv(const std::string& path, const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> parse_features_csv(const std::string& path);

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> parse_metrics_csv(const std::string& path);

struct SummaryStat {
    std::string name;
    double value = 0.0;
};
void write_summary_csv(const std::string& path, const std::vector<SummaryStat>& stats);
std::vector<SummaryStat> parse_summary_csv(const std::string& path);

}  // namespace bpslam
