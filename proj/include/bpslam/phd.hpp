#pragma once

#include <functional>
#include <vector>

#include "bpslam/geometry.hpp"
#include "bpslam/models.hpp"

namespace bpslam {

/// Detection probability as a function of (agent position, feature position).
using DetectionProbFn = std::function<double(const Vec2&, const Vec2&)>;

/// Weighted particle representation of the intensity of undetected features
/// for one PA. The weight sum is the expected number of undetected features.
struct UndetectedIntensity {
    std::vector<Vec2> particles;
    std::vector<double> weights;

    double mass() const {
        // Kahan summation: the mass participates in tight closed-form checks
        // and must not drift with the particle budget.
        double s = 0.0, comp = 0.0;
        for (double w : weights) {
            const double y = w - comp;
            const double t = s + y;
            comp = (t - s) - y;
            s = t;
        }
        return s;
    }
};

/// Weighted view of the agent's predicted particle cloud, used to average
/// the detection probability over the agent state.
struct AgentCloudView {
    const std::vector<Vec2>* positions = nullptr;
    const std::vector<double>* weights = nullptr;  // normalized
};

/// Expected number of newly detected features and their spatial density.
struct BirthInfo {
    double mu_n = 0.0;
    std::function<double(const Vec2&)> f_n;  // integrates to 1 when mu_n > 0
};

/// Histogram density estimator on the ROI disk; cell areas are clipped to
/// the disk so a uniform particle set evaluates to 1 / (pi r^2).
class RoiGrid {
public:
    RoiGrid(const FloorPlan& roi, std::size_t bins = 64);

    /// Density of the weighted particle set, normalized to integrate to 1.
    std::function<double(const Vec2&)> density(const std::vector<Vec2>& particles,
                                               const std::vector<double>& weights) const;

private:
    Vec2 center_;
    double radius_;
    std::size_t bins_;
    double cell_size_;
    std::vector<double> cell_area_;  // bins x bins, clipped to the disk
};

/// Uniform intensity on the ROI disk with total mass mu_initial.
UndetectedIntensity phd_init(const FloorPlan& roi, double mu_initial,
                             std::size_t n_particles, Rng& rng);

/// Survival scaling, position jitter, and Poisson birth with total mass
/// mu_birth uniform on the ROI (zero particles appended when mu_birth == 0).
void phd_predict(UndetectedIntensity& intensity, const FeatureDynamicsParams& dynamics,
                 double mu_birth, const FloorPlan& roi, std::size_t n_birth_particles,
                 Rng& rng);

/// mu_n and f_n for the newly detected features, from the predicted
/// intensity and the predicted agent cloud.
BirthInfo birth_info(const UndetectedIntensity& predicted, const AgentCloudView& agent,
                     const RoiGrid& grid, const DetectionProbFn& p_detect);

/// Missed-detection update: each weight is scaled by 1 - E[P_d] under the
/// agent cloud.
void phd_update(UndetectedIntensity& predicted, const AgentCloudView& agent,
                const DetectionProbFn& p_detect);

/// Systematic resampling back to the particle budget, preserving mass.
void phd_resample_if_degenerate(UndetectedIntensity& intensity, std::size_t budget,
                                Rng& rng);

/// Effective sample size of a weight vector (any positive scale).
double effective_sample_size(const std::vector<double>& weights);

}  // namespace bpslam
