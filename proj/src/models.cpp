#include "bpslam/models.hpp"

#include <cmath>
#include <stdexcept>

namespace bpslam {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}

double gaussian_pdf(double x, double mean, double sigma) {
    const double u = (x - mean) / sigma;
    return kInvSqrt2Pi / sigma * std::exp(-0.5 * u * u);
}

AgentState motion_transition_mean(const AgentState& x, const MotionParams& params) {
    AgentState out;
    out.p = x.p + params.dt * x.v;
    out.v = x.v;
    return out;
}

AgentState motion_transition_sample(const AgentState& x, const MotionParams& params,
                                    Rng& rng) {
    AgentState out = motion_transition_mean(x, params);
    if (params.sigma_w > 0.0) {
        std::normal_distribution<double> noise(0.0, params.sigma_w);
        const Vec2 w{noise(rng), noise(rng)};
        const double half_dt2 = 0.5 * params.dt * params.dt;
        out.p = out.p + half_dt2 * w;
        out.v = out.v + params.dt * w;
    }
    return out;
}

void feature_transition(FeatureBelief& belief, const FeatureDynamicsParams& params,
                        Rng& rng) {
    const double existence = belief.existence();
    for (double& w : belief.weights) w *= params.p_survival;
    belief.nonexistence += (1.0 - params.p_survival) * existence;
    if (params.sigma_a > 0.0) {
        std::normal_distribution<double> jitter(0.0, params.sigma_a);
        for (Vec2& a : belief.particles) {
            a.x += jitter(rng);
            a.y += jitter(rng);
        }
    }
}

double range_likelihood(const Measurement& z, const Vec2& agent_p, const Vec2& a) {
    return gaussian_pdf(z.z, distance(agent_p, a), z.sigma);
}

double range_likelihood(const Measurement& z, const AgentState& x, const Vec2& a) {
    return range_likelihood(z, x.p, a);
}

double g_factor(const AgentState& x, const Vec2& a, bool exists, int c,
                const MeasurementFrame& frame, const SensorModel& sensor) {
    if (c < 0 || c > (int)frame.size())
        throw std::out_of_range("association value outside {0..M}");
    if (!exists) return c == 0 ? 1.0 : 0.0;
    const double pd = sensor.detection_prob(x.p, a);
    if (c == 0) return 1.0 - pd;
    const Measurement& z = frame[(std::size_t)c - 1];
    return pd * range_likelihood(z, x, a) / (sensor.mu_fa * sensor.fa_density(z.z));
}

double h_factor(const AgentState& x, const Vec2& a, bool exists, int b,
                const Measurement& z_m, const SensorModel& sensor, double mu_fn) {
    if (b < 0) throw std::out_of_range("association value outside {0..K}");
    if (!exists) return 1.0;  // nonexistence mass is carried as a scalar
    if (b != 0) return 0.0;
    return mu_fn * range_likelihood(z_m, x, a) /
           (sensor.mu_fa * sensor.fa_density(z_m.z));
}

}  // namespace bpslam
