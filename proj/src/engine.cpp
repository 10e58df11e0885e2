#include "bpslam/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "bpslam/kernels.hpp"
#include "bpslam/resample.hpp"

namespace bpslam {

namespace {

constexpr std::uint64_t kPurposeInit = 0;
constexpr std::uint64_t kPurposeAgentPredict = 1;
constexpr std::uint64_t kPurposeFeaturePredict = 2;
constexpr std::uint64_t kPurposePhdPredict = 3;
constexpr std::uint64_t kPurposeResample = 4;
constexpr std::uint64_t kPurposePhdResample = 5;
constexpr std::uint64_t kPurposeNewFeature = 100;  // + measurement index

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<Vec2> agent_positions(const std::vector<AgentState>& agent) {
    std::vector<Vec2> pos(agent.size());
    for (std::size_t i = 0; i < agent.size(); ++i) pos[i] = agent[i].p;
    return pos;
}

// Clutter density clamped onto its support, so the likelihood ratio stays
// finite for ranges that noise pushed just outside [0, fa_range_max].
double clutter_density(const SensorModel& sensor, double z) {
    return sensor.fa_density(std::clamp(z, 0.0, sensor.fa_range_max));
}

}  // namespace

Filter::Filter(FilterParams params, FloorPlan plan, std::vector<Vec2> pa_priors,
               Vec2 p1, std::uint64_t seed)
    : params_(std::move(params)), plan_(std::move(plan)), seed_(seed) {
    if (params_.n_particles == 0) throw std::invalid_argument("Filter: zero particles");
    if (pa_priors.empty()) throw std::invalid_argument("Filter: no PAs");
    if (!(params_.p_prun > 0.0 && params_.p_prun <= params_.p_det && params_.p_det < 1.0)) {
        throw std::invalid_argument("Filter: require 0 < p_prun <= p_det < 1");
    }

    const std::size_t n = params_.n_particles;
    Rng rng = stage_rng(0, kPurposeInit);
    std::uniform_real_distribution<double> box(-params_.init_halfwidth,
                                               params_.init_halfwidth);
    agent_.resize(n);
    for (auto& s : agent_) {
        s.p = {p1.x + box(rng), p1.y + box(rng)};
        s.v = {box(rng), box(rng)};
    }
    weights_.assign(n, 1.0 / static_cast<double>(n));

    legacy_.resize(pa_priors.size());
    next_id_.assign(pa_priors.size(), 1);
    std::normal_distribution<double> prior(0.0, params_.sigma_a1);
    for (std::size_t j = 0; j < pa_priors.size(); ++j) {
        LegacyFeature f;
        f.id = next_id_[j]++;
        f.belief.particles.resize(n);
        for (auto& a : f.belief.particles) {
            a = {pa_priors[j].x + prior(rng), pa_priors[j].y + prior(rng)};
        }
        f.belief.weights = weights_;  // existence 1, coupled to uniform agent weights
        f.belief.nonexistence = 0.0;
        legacy_[j].push_back(std::move(f));
    }

    intensity_.reserve(pa_priors.size());
    for (std::size_t j = 0; j < pa_priors.size(); ++j) {
        intensity_.push_back(
            phd_init(plan_, params_.mu_initial, params_.phd_particles, rng));
    }
}

Rng Filter::stage_rng(std::size_t pa, std::uint64_t purpose) const {
    std::uint64_t s = splitmix(seed_);
    s = splitmix(s ^ static_cast<std::uint64_t>(n_));
    s = splitmix(s ^ (static_cast<std::uint64_t>(pa) + 1));
    s = splitmix(s ^ purpose);
    return Rng(s);
}

double Filter::effective_sigma(const Measurement& z) const {
    return z.sigma > 0.0 ? params_.sigma_scale * z.sigma : params_.sensor.sigma_meas;
}

void Filter::seed_known_feature(std::size_t pa, Vec2 pos) {
    Rng rng = stage_rng(pa, kPurposeNewFeature + 900 + legacy_[pa].size());
    std::normal_distribution<double> prior(0.0, params_.sigma_a1);
    LegacyFeature f;
    f.id = next_id_[pa]++;
    f.belief.particles.resize(agent_.size());
    for (auto& a : f.belief.particles) a = {pos.x + prior(rng), pos.y + prior(rng)};
    f.belief.weights = weights_;
    f.belief.nonexistence = 0.0;
    legacy_[pa].push_back(std::move(f));
}

void Filter::predict() {
    ++n_;
    Rng arng = stage_rng(0, kPurposeAgentPredict);
    for (auto& s : agent_) s = motion_transition_sample(s, params_.motion, arng);
    for (std::size_t j = 0; j < legacy_.size(); ++j) {
        Rng frng = stage_rng(j, kPurposeFeaturePredict);
        for (auto& f : legacy_[j]) {
            feature_transition(f.belief, params_.dynamics, frng);
        }
        Rng prng = stage_rng(j, kPurposePhdPredict);
        const std::size_t n_birth =
            params_.mu_birth > 0.0 ? std::max<std::size_t>(1, params_.phd_particles / 64)
                                   : 0;
        phd_predict(intensity_[j], params_.dynamics, params_.mu_birth, plan_, n_birth,
                    prng);
    }
}

DaMatrix Filter::evaluate_legacy(std::size_t pa, const MeasurementFrame& frame) const {
    const auto& feats = legacy_.at(pa);
    const std::size_t k_count = feats.size();
    const std::size_t m_count = frame.size();
    const std::size_t n = agent_.size();
    const std::vector<Vec2> pos = agent_positions(agent_);
    const double p_d = params_.sensor.p_detect;

    DaMatrix beta(k_count, m_count + 1);
    std::vector<double> g(n);
    for (std::size_t k = 0; k < k_count; ++k) {
        const FeatureBelief& b = feats[k].belief;
        beta(k, 0) = (1.0 - p_d) * b.existence() + b.nonexistence;
        for (std::size_t m = 0; m < m_count; ++m) {
            const double scale =
                p_d / (params_.sensor.mu_fa * clutter_density(params_.sensor, frame[m].z));
            kernels::detection_factors(n, pos.data(), b.particles.data(), frame[m].z,
                                       effective_sigma(frame[m]), scale, g.data(),
                                       params_.parallel);
            beta(k, m + 1) = kernels::weighted_sum(n, b.weights.data(), g.data());
        }
    }
    return beta;
}

DaMatrix Filter::evaluate_new(std::size_t pa, const MeasurementFrame& frame,
                              const BirthInfo& birth) const {
    const std::size_t k_count = legacy_.at(pa).size();
    const std::size_t m_count = frame.size();
    DaMatrix xi(m_count, k_count + 1);
    std::fill(xi.data.begin(), xi.data.end(), 1.0);
    if (birth.mu_n <= 0.0) return xi;

    const UndetectedIntensity& intensity = intensity_.at(pa);
    if (intensity.particles.empty()) return xi;

    // Subsampled double Monte Carlo integral of f(z | x, a) over the agent
    // cloud and the (normalized) newly-detected intensity.
    const std::size_t n = agent_.size();
    const std::size_t sa = std::max<std::size_t>(1, n / params_.xi_agent_subsample);
    const std::size_t sp =
        std::max<std::size_t>(1, intensity.particles.size() / params_.xi_phd_subsample);
    double w_norm = 0.0;
    for (std::size_t i = 0; i < n; i += sa) w_norm += weights_[i];
    double omega_norm = 0.0;
    for (std::size_t q = 0; q < intensity.particles.size(); q += sp) {
        omega_norm += intensity.weights[q];
    }
    if (w_norm <= 0.0 || omega_norm <= 0.0) return xi;

    for (std::size_t m = 0; m < m_count; ++m) {
        const double sigma = effective_sigma(frame[m]);
        double integral = 0.0;
        for (std::size_t i = 0; i < n; i += sa) {
            double inner = 0.0;
            for (std::size_t q = 0; q < intensity.particles.size(); q += sp) {
                inner += intensity.weights[q] *
                         gaussian_pdf(frame[m].z,
                                      distance(agent_[i].p, intensity.particles[q]),
                                      sigma);
            }
            integral += weights_[i] * inner;
        }
        integral /= w_norm * omega_norm;
        xi(m, 0) = 1.0 + birth.mu_n * integral /
                             (params_.sensor.mu_fa *
                              clutter_density(params_.sensor, frame[m].z));
    }
    return xi;
}

void Filter::update(const std::vector<MeasurementFrame>& frames,
                    const std::vector<DaOutputs>& da,
                    const std::vector<BirthInfo>& births) {
    const std::size_t n = agent_.size();
    const double p_d = params_.sensor.p_detect;
    const std::vector<Vec2> pos = agent_positions(agent_);

    std::vector<double> logw(n);
    for (std::size_t i = 0; i < n; ++i) {
        logw[i] = weights_[i] > 0.0 ? std::log(weights_[i])
                                    : -std::numeric_limits<double>::infinity();
    }

    // Pass 1: per-feature existence parts and agent messages gamma_k. The
    // joint agent weight accumulates log(gamma) over every feature with
    // measurements; M = 0 frames contribute a constant gamma and leave the
    // agent belief untouched.
    struct FeatureScratch {
        std::vector<double> exist_part;  // per particle, existence channel of gamma
        std::vector<double> gamma;       // exist_part + eta(0) * nonexistence
        double eta0 = 1.0;
        bool has_meas = false;
    };
    std::vector<std::vector<FeatureScratch>> scratch(legacy_.size());

    std::vector<double> g(n);
    for (std::size_t j = 0; j < legacy_.size(); ++j) {
        const MeasurementFrame& frame = frames[j];
        const std::size_t m_count = frame.size();
        scratch[j].resize(legacy_[j].size());
        for (std::size_t k = 0; k < legacy_[j].size(); ++k) {
            const FeatureBelief& b = legacy_[j][k].belief;
            FeatureScratch& s = scratch[j][k];
            s.exist_part.resize(n);
            s.has_meas = m_count > 0;
            s.eta0 = m_count > 0 ? da[j].eta(k, 0) : 1.0;
            if (m_count == 0) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double c = weights_[i] > 0.0 ? b.weights[i] / weights_[i] : 0.0;
                    s.exist_part[i] = (1.0 - p_d) * c;
                }
                continue;
            }
            s.gamma.resize(n);
            std::vector<double> detect_sum(n, 0.0);
            for (std::size_t m = 0; m < m_count; ++m) {
                const double scale =
                    p_d /
                    (params_.sensor.mu_fa * clutter_density(params_.sensor, frame[m].z));
                kernels::detection_factors(n, pos.data(), b.particles.data(), frame[m].z,
                                           effective_sigma(frame[m]), scale, g.data(),
                                           params_.parallel);
                const double eta_m = da[j].eta(k, m + 1);
                for (std::size_t i = 0; i < n; ++i) detect_sum[i] += eta_m * g[i];
            }
            for (std::size_t i = 0; i < n; ++i) {
                const double c = weights_[i] > 0.0 ? b.weights[i] / weights_[i] : 0.0;
                s.exist_part[i] = c * (s.eta0 * (1.0 - p_d) + detect_sum[i]);
                s.gamma[i] = s.exist_part[i] + s.eta0 * b.nonexistence;
            }
            kernels::log_accumulate(n, logw.data(), s.gamma.data(), params_.parallel);
        }
    }

    // Normalize the agent weights in the log domain.
    double max_log = -std::numeric_limits<double>::infinity();
    for (double l : logw) max_log = std::max(max_log, l);
    if (!std::isfinite(max_log)) {
        throw DivergenceError("all agent particle weights vanished at step " +
                              std::to_string(n_));
    }
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        weights_[i] = std::exp(logw[i] - max_log);
        wsum += weights_[i];
    }
    for (double& w : weights_) w /= wsum;

    // Pass 2: legacy feature beliefs. The joint with feature k divides its
    // own gamma back out of the updated agent weight, so the stored joint
    // weights stay consistent with the agent marginal.
    for (std::size_t j = 0; j < legacy_.size(); ++j) {
        for (std::size_t k = 0; k < legacy_[j].size(); ++k) {
            FeatureBelief& b = legacy_[j][k].belief;
            const FeatureScratch& s = scratch[j][k];
            double exist_total = 0.0;
            double nonexist_total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double base = weights_[i];
                if (s.has_meas) {
                    base = s.gamma[i] > 0.0 ? weights_[i] / s.gamma[i] : 0.0;
                }
                b.weights[i] = base * s.exist_part[i];
                exist_total += b.weights[i];
                nonexist_total += base;
            }
            nonexist_total *= s.eta0 * b.nonexistence;
            const double total = exist_total + nonexist_total;
            if (total > 0.0) {
                for (double& w : b.weights) w /= total;
                b.nonexistence = nonexist_total / total;
            } else {
                std::fill(b.weights.begin(), b.weights.end(), 0.0);
                b.nonexistence = 1.0;
            }
        }
    }

    // Resample before the new features are drawn: a newborn belief sampled
    // from the resampled (uniform-weight) agent cloud starts with one ring
    // point per surviving particle instead of being decimated immediately.
    resampled_ = false;
    resample_if_needed();

    // One candidate feature per measurement, so the pre-pruning feature count
    // grows by the frame size.
    for (std::size_t j = 0; j < legacy_.size(); ++j) {
        const MeasurementFrame& frame = frames[j];
        for (std::size_t m = 0; m < frame.size(); ++m) {
            const double sig0 = da[j].sigma_out(m, 0);
            const double sigma = effective_sigma(frame[m]);
            const double clutter = params_.sensor.mu_fa *
                                   clutter_density(params_.sensor, frame[m].z);
            Rng rng = stage_rng(j, kPurposeNewFeature + m);
            std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
            std::normal_distribution<double> radius(frame[m].z, sigma);

            LegacyFeature feat;
            feat.id = next_id_[j]++;
            feat.belief.particles.resize(n);
            feat.belief.weights.resize(n);
            double exist_sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double theta = angle(rng);
                const double rho = std::max(std::abs(radius(rng)), 1e-9);
                const Vec2 a{agent_[i].p.x + rho * std::cos(theta),
                             agent_[i].p.y + rho * std::sin(theta)};
                feat.belief.particles[i] = a;
                // Ring proposal density, with the reflection at rho = 0 folded in.
                const double q = (gaussian_pdf(rho, frame[m].z, sigma) +
                                  gaussian_pdf(-rho, frame[m].z, sigma)) /
                                 (2.0 * std::numbers::pi * rho);
                double target = 0.0;
                if (births[j].mu_n > 0.0 && births[j].f_n) {
                    target = births[j].mu_n * births[j].f_n(a) *
                             gaussian_pdf(frame[m].z, rho, sigma) / clutter;
                }
                const double v = weights_[i] * sig0 * target / q;
                feat.belief.weights[i] = v;
                exist_sum += v;
            }
            // Nonexistence channel: phi_m = sum_b of the normalized message, = 1.
            const double total = exist_sum + 1.0;
            for (double& v : feat.belief.weights) v /= total;
            feat.belief.nonexistence = 1.0 / total;
            legacy_[j].push_back(std::move(feat));
        }
    }
}

std::size_t Filter::detect_prune() {
    std::size_t pruned = 0;
    for (auto& feats : legacy_) {
        auto keep = std::remove_if(feats.begin(), feats.end(), [&](const LegacyFeature& f) {
            return f.belief.existence() <= params_.p_prun;
        });
        pruned += static_cast<std::size_t>(feats.end() - keep);
        feats.erase(keep, feats.end());
    }
    return pruned;
}

void Filter::resample_if_needed() {
    const std::size_t n = agent_.size();
    if (effective_sample_size(weights_) >= 0.5 * static_cast<double>(n)) return;

    Rng rng = stage_rng(0, kPurposeResample);
    const std::vector<std::size_t> idx = systematic_resample_indices(weights_, n, rng);

    std::vector<AgentState> agent(n);
    for (std::size_t i = 0; i < n; ++i) agent[i] = agent_[idx[i]];

    const double kde_factor =
        params_.kde_bandwidth * std::pow(static_cast<double>(n), -1.0 / 6.0);
    for (auto& feats : legacy_) {
        for (auto& feat : feats) {
            FeatureBelief& b = feat.belief;
            const double e = b.existence();
            std::vector<Vec2> particles(n);
            std::vector<double> ratios(n);
            double rsum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t s = idx[i];
                particles[i] = b.particles[s];
                ratios[i] = weights_[s] > 0.0 ? b.weights[s] / weights_[s] : 0.0;
                rsum += ratios[i];
            }
            b.particles = std::move(particles);
            if (rsum > 0.0) {
                b.weights.resize(n);
                for (std::size_t i = 0; i < n; ++i) b.weights[i] = e * ratios[i] / rsum;
            } else {
                std::fill(b.weights.begin(), b.weights.end(), 0.0);
                b.nonexistence = 1.0;
            }
            // Adaptive regularization in polar coordinates about the agent
            // cloud center: a young feature is a range ring (radius informed,
            // angle nearly uniform), so the kernel bandwidth is estimated per
            // polar axis and shrinks automatically as the cloud localizes.
            // The static regularization noise is the lower bound.
            if (kde_factor > 0.0 && rsum > 0.0) {
                Vec2 center{0.0, 0.0};
                for (std::size_t i = 0; i < n; ++i)
                    center = center + agent_[i].p * (1.0 / static_cast<double>(n));
                double cs = 0.0, sn = 0.0, rho_mean = 0.0, rho_sq = 0.0;
                std::vector<double> rho(n), theta(n);
                for (std::size_t i = 0; i < n; ++i) {
                    const Vec2 d = b.particles[i] - center;
                    rho[i] = std::sqrt(d.x * d.x + d.y * d.y);
                    theta[i] = std::atan2(d.y, d.x);
                    const double w = ratios[i] / rsum;
                    cs += w * std::cos(theta[i]);
                    sn += w * std::sin(theta[i]);
                    rho_mean += w * rho[i];
                    rho_sq += w * rho[i] * rho[i];
                }
                const double resultant = std::sqrt(cs * cs + sn * sn);
                double sigma_theta = std::numbers::pi;
                if (resultant > 1e-12) {
                    sigma_theta = std::min(
                        std::sqrt(std::max(-2.0 * std::log(resultant), 0.0)),
                        std::numbers::pi);
                }
                const double sigma_rho =
                    std::sqrt(std::max(rho_sq - rho_mean * rho_mean, 0.0));
                // Kernel smoothing with shrinkage toward the cloud mean keeps
                // the total variance constant, so tight clouds stay tight
                // instead of inflating a little every resample. A cloud that
                // is still angularly near-uniform (small resultant) has no
                // meaningful mean angle and is only jittered.
                const double h = std::min(kde_factor, 0.9);
                const double shrink = std::sqrt(1.0 - h * h);
                const double theta_bar = std::atan2(sn, cs);
                const bool angle_uniform = resultant < 0.5;
                const double jr = std::max(h * sigma_rho, params_.dynamics.sigma_a);
                std::normal_distribution<double> jitter_t(0.0, h * sigma_theta);
                std::normal_distribution<double> jitter_r(0.0, jr);
                for (std::size_t i = 0; i < n; ++i) {
                    double t;
                    if (angle_uniform) {
                        t = theta[i] + jitter_t(rng);
                    } else {
                        double d = std::remainder(theta[i] - theta_bar,
                                                  2.0 * std::numbers::pi);
                        t = theta_bar + shrink * d + jitter_t(rng);
                    }
                    double r = rho_mean + shrink * (rho[i] - rho_mean) + jitter_r(rng);
                    r = std::max(r, 0.0);
                    b.particles[i] = {center.x + r * std::cos(t),
                                      center.y + r * std::sin(t)};
                }
            } else if (params_.dynamics.sigma_a > 0.0) {
                std::normal_distribution<double> jitter(0.0, params_.dynamics.sigma_a);
                for (auto& a : b.particles) {
                    a.x += jitter(rng);
                    a.y += jitter(rng);
                }
            }
        }
    }
    agent_ = std::move(agent);
    weights_.assign(n, 1.0 / static_cast<double>(n));
    resampled_ = true;
}

AgentState Filter::agent_mmse() const {
    AgentState mean{{0.0, 0.0}, {0.0, 0.0}};
    for (std::size_t i = 0; i < agent_.size(); ++i) {
        mean.p = mean.p + agent_[i].p * weights_[i];
        mean.v = mean.v + agent_[i].v * weights_[i];
    }
    return mean;
}

std::vector<FeatureReport> Filter::report_features(std::size_t pa) const {
    std::vector<FeatureReport> out;
    out.reserve(legacy_[pa].size());
    for (const auto& feat : legacy_[pa]) {
        FeatureReport r;
        r.id = feat.id;
        r.existence = feat.belief.existence();
        r.detected = r.existence > params_.p_det;
        Vec2 mmse{0.0, 0.0};
        if (r.existence > 0.0) {
            for (std::size_t i = 0; i < feat.belief.particles.size(); ++i) {
                mmse = mmse + feat.belief.particles[i] * feat.belief.weights[i];
            }
            mmse = mmse * (1.0 / r.existence);
        }
        r.position = mmse;
        out.push_back(r);
    }
    return out;
}

StepReport Filter::step(const std::vector<MeasurementFrame>& frames) {
    if (frames.size() != legacy_.size()) {
        throw std::invalid_argument("Filter::step: one frame per PA required");
    }
    predict();

    const std::vector<Vec2> pos = agent_positions(agent_);
    const AgentCloudView view{&pos, &weights_};
    const RoiGrid grid(plan_, params_.grid_bins);
    const DetectionProbFn p_detect = [this](const Vec2& x, const Vec2& a) {
        return params_.sensor.detection_prob(x, a);
    };

    std::vector<BirthInfo> births(legacy_.size());
    std::vector<DaOutputs> da(legacy_.size());
    for (std::size_t j = 0; j < legacy_.size(); ++j) {
        births[j] = birth_info(intensity_[j], view, grid, p_detect);
        DaInputs inputs;
        inputs.beta = evaluate_legacy(j, frames[j]);
        inputs.xi = evaluate_new(j, frames[j], births[j]);
        da[j] = da_iterate(inputs, params_.da_eps, params_.da_p_max);
    }

    update(frames, da, births);

    StepReport report;
    report.n = n_;
    report.resampled = resampled_;
    report.n_pruned = detect_prune();
    report.agent_mmse = agent_mmse();
    report.da_iterations.resize(legacy_.size());

    // The agent cloud may have been resampled inside update(), so the PHD
    // stage re-reads the particle positions.
    const std::vector<Vec2> post = agent_positions(agent_);
    const AgentCloudView post_view{&post, &weights_};
    for (std::size_t j = 0; j < legacy_.size(); ++j) {
        report.da_iterations[j] = da[j].iterations;
        phd_update(intensity_[j], post_view, p_detect);
        Rng rng = stage_rng(j, kPurposePhdResample);
        phd_resample_if_degenerate(intensity_[j], params_.phd_particles, rng);
    }

    report.features.resize(legacy_.size());
    for (std::size_t j = 0; j < legacy_.size(); ++j) {
        report.features[j] = report_features(j);
    }
    return report;
}

}  // namespace bpslam
