#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpslam/bp_da.hpp"
#include "bpslam/geometry.hpp"
#include "bpslam/models.hpp"
#include "bpslam/phd.hpp"

namespace bpslam {

struct FilterParams {
    std::size_t n_particles = 10000;
    double p_det = 0.5;
    double p_prun = 1e-4;
    double da_eps = 1e-7;
    std::size_t da_p_max = 1000;
    MotionParams motion;
    FeatureDynamicsParams dynamics;
    SensorModel sensor;
    double sigma_a1 = 1e-3;        // initial PA particle std, m
    double sigma_scale = 1.5;      // inflation of the reported measurement std
    double mu_birth = 1e-4;        // birth mass per step (undetected intensity)
    double mu_initial = 6.0;       // initial undetected-intensity mass
    std::size_t phd_particles = 4096;     // intensity particle budget per PA
    std::size_t xi_agent_subsample = 64;  // agent particles used in xi integrals
    std::size_t xi_phd_subsample = 256;   // intensity particles used in xi integrals
    std::size_t grid_bins = 64;           // birth-density histogram resolution
    double init_halfwidth = 0.5;   // agent prior support half-width per component
    // Post-resampling feature jitter is the larger of sigma_a and an adaptive
    // kernel bandwidth kde_bandwidth * cloud_std * N^(-1/6); the adaptive term
    // keeps broad (still uninformed) feature clouds from coalescing onto a
    // single ancestor line before the geometry can resolve them.
    double kde_bandwidth = 2.0;
    bool parallel = true;
};

/// One legacy feature of one PA. Particles are index-aligned with the agent
/// particles (stacked state); weights are joint weights summing to the
/// existence probability, nonexistence carries the rest.
struct LegacyFeature {
    int id = 0;
    FeatureBelief belief;
};

struct FeatureReport {
    int id = 0;
    Vec2 position;  // MMSE estimate
    double existence = 0.0;
    bool detected = false;
};

struct StepReport {
    std::size_t n = 0;  // time index, 1-based
    AgentState agent_mmse;
    std::vector<std::vector<FeatureReport>> features;  // per PA
    std::vector<std::size_t> da_iterations;            // per PA
    std::size_t n_pruned = 0;
    bool resampled = false;
};

class DivergenceError : public std::runtime_error {
  public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

class Filter {
  public:
    /// pa_priors: prior mean position of each PA. p1: agent starting position.
    Filter(FilterParams params, FloorPlan plan, std::vector<Vec2> pa_priors,
           Vec2 p1, std::uint64_t seed);

    /// Full per-step schedule: predict, evaluate, per-PA data association,
    /// update, detect/prune, intensity sync. frames has one entry per PA.
    StepReport step(const std::vector<MeasurementFrame>& frames);

    // Individual stages, exposed for testing. step() calls them in order.
    void predict();
    DaMatrix evaluate_legacy(std::size_t pa, const MeasurementFrame& frame) const;
    DaMatrix evaluate_new(std::size_t pa, const MeasurementFrame& frame,
                          const BirthInfo& birth) const;
    void update(const std::vector<MeasurementFrame>& frames,
                const std::vector<DaOutputs>& da, const std::vector<BirthInfo>& births);
    std::size_t detect_prune();

    /// Seeds a legacy feature with a tight known-position prior (existence 1),
    /// like the PA priors. Diagnostic hook.
    void seed_known_feature(std::size_t pa, Vec2 pos);

    std::size_t num_pas() const { return legacy_.size(); }
    std::size_t time_index() const { return n_; }
    const std::vector<AgentState>& agent_particles() const { return agent_; }
    const std::vector<double>& agent_weights() const { return weights_; }
    const std::vector<LegacyFeature>& legacy_features(std::size_t pa) const {
        return legacy_[pa];
    }
    const UndetectedIntensity& undetected_intensity(std::size_t pa) const {
        return intensity_[pa];
    }
    AgentState agent_mmse() const;
    double effective_sigma(const Measurement& z) const;

  private:
    Rng stage_rng(std::size_t pa, std::uint64_t purpose) const;
    void resample_if_needed();
    std::vector<FeatureReport> report_features(std::size_t pa) const;

    FilterParams params_;
    FloorPlan plan_;
    std::uint64_t seed_;
    std::size_t n_ = 0;
    std::vector<AgentState> agent_;
    std::vector<double> weights_;
    std::vector<std::vector<LegacyFeature>> legacy_;  // per PA
    std::vector<UndetectedIntensity> intensity_;      // per PA
    std::vector<int> next_id_;                        // per PA, never reused
    bool resampled_ = false;
};

}  // namespace bpslam
