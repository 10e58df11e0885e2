#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "bpslam/geometry.hpp"

namespace bpslam {

using Rng = std::mt19937_64;

struct AgentState {
    Vec2 p;  // position, m
    Vec2 v;  // velocity, m/s
};

struct MotionParams {
    double dt = 1.0;        // s
    double sigma_w = 0.01;  // driving-noise std, m/s^2
};

struct FeatureDynamicsParams {
    double p_survival = 0.999;
    double sigma_a = 1e-4;  // regularization-noise std, m
};

/// Detection/clutter model assumed by the filter. p_detect is constant over
/// the ROI; the (x, a) arguments on the evaluators leave room for a
/// range-dependent model.
struct SensorModel {
    double p_detect = 0.95;
    double mu_fa = 1.0;         // expected clutter count per PA per step
    double fa_range_max = 30.0; // clutter ranges uniform on [0, fa_range_max]
    double sigma_meas = 0.15;   // assumed measurement std, m

    double detection_prob(const Vec2& /*agent_p*/, const Vec2& /*a*/) const {
        return p_detect;
    }
    double fa_density(double z) const {
        return (z >= 0.0 && z <= fa_range_max) ? 1.0 / fa_range_max : 0.0;
    }
};

struct Measurement {
    double z = 0.0;      // range, m
    double sigma = 0.1;  // per-measurement std, m
};

/// All range measurements of one PA at one time step.
using MeasurementFrame = std::vector<Measurement>;

/// Particle belief over a feature position plus the scalar mass on the
/// nonexistence channel. Weights sum to the existence probability, so
/// existence() + nonexistence == 1 for a normalized belief.
struct FeatureBelief {
    std::vector<Vec2> particles;
    std::vector<double> weights;
    double nonexistence = 0.0;

    double existence() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

double gaussian_pdf(double x, double mean, double sigma);

/// Near constant-velocity transition x' = F x + G w, w ~ N(0, sigma_w^2 I).
AgentState motion_transition_sample(const AgentState& x, const MotionParams& params,
                                    Rng& rng);

/// Deterministic part of the motion model (w = 0).
AgentState motion_transition_mean(const AgentState& x, const MotionParams& params);

/// Survival/death prediction for a feature belief: the existence channel is
/// scaled by p_survival and the particles jittered by N(0, sigma_a^2 I);
/// the leaked mass joins the nonexistence channel, so total mass is conserved.
void feature_transition(FeatureBelief& belief, const FeatureDynamicsParams& params,
                        Rng& rng);

/// N(z; ||p - a||, sigma^2) with the measurement's own sigma.
double range_likelihood(const Measurement& z, const AgentState& x, const Vec2& a);
double range_likelihood(const Measurement& z, const Vec2& agent_p, const Vec2& a);

/// Likelihood-vs-clutter factor for a legacy feature. c == 0 means no
/// detection; c == m > 0 associates measurement frame[m-1].
double g_factor(const AgentState& x, const Vec2& a, bool exists, int c,
                const MeasurementFrame& frame, const SensorModel& sensor);

/// Birth factor for a new feature hypothesis on one measurement.
/// mu_fn = mu_n * f_n(a | x), the newly-detected intensity at a.
/// b in {1..K} (claimed by a legacy feature) yields 0 for an existing
/// feature; the nonexistence channel is carried as a scalar elsewhere.
double h_factor(const AgentState& x, const Vec2& a, bool exists, int b,
                const Measurement& z_m, const SensorModel& sensor, double mu_fn);

}  // namespace bpslam
