#include "bpslam/phd.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "bpslam/resample.hpp"

namespace bpslam {

namespace {

// Weighted average of P_d(x, a) over the agent cloud, subsampled for speed.
double mean_detection_prob(const AgentCloudView& agent, const Vec2& a,
                           const DetectionProbFn& p_detect,
                           std::size_t max_samples = 128) {
    const auto& pos = *agent.positions;
    const auto& w = *agent.weights;
    const std::size_t n = pos.size();
    const std::size_t stride = n > max_samples ? n / max_samples : 1;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; i += stride) {
        num += w[i] * p_detect(pos[i], a);
        den += w[i];
    }
    return den > 0.0 ? num / den : 0.0;
}

Vec2 sample_in_disk(const Vec2& center, double radius, Rng& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double r = radius * std::sqrt(u01(rng));
    const double phi = 2.0 * M_PI * u01(rng);
    return {center.x + r * std::cos(phi), center.y + r * std::sin(phi)};
}

}  // namespace

double effective_sample_size(const std::vector<double>& weights) {
    double s = 0.0, s2 = 0.0;
    for (double w : weights) {
        s += w;
        s2 += w * w;
    }
    return s2 > 0.0 ? s * s / s2 : 0.0;
}

RoiGrid::RoiGrid(const FloorPlan& roi, std::size_t bins)
    : center_(roi.roi_center), radius_(roi.roi_radius), bins_(bins),
      cell_size_(2.0 * roi.roi_radius / (double)bins),
      cell_area_(bins * bins, 0.0) {
    // Clip cell areas to the disk by subsampling each cell on a 4x4 grid.
    for (std::size_t iy = 0; iy < bins_; ++iy)
        for (std::size_t ix = 0; ix < bins_; ++ix) {
            int inside = 0;
            for (int sy = 0; sy < 4; ++sy)
                for (int sx = 0; sx < 4; ++sx) {
                    const Vec2 p{center_.x - radius_ + (ix + 0.125 + 0.25 * sx) * cell_size_,
                                 center_.y - radius_ + (iy + 0.125 + 0.25 * sy) * cell_size_};
                    if (distance(p, center_) <= radius_) ++inside;
                }
            cell_area_[iy * bins_ + ix] =
                cell_size_ * cell_size_ * (double)inside / 16.0;
        }
}

std::function<double(const Vec2&)> RoiGrid::density(
    const std::vector<Vec2>& particles, const std::vector<double>& weights) const {
    auto hist = std::make_shared<std::vector<double>>(bins_ * bins_, 0.0);
    double total = 0.0;
    for (std::size_t q = 0; q < particles.size(); ++q) {
        const double fx = (particles[q].x - (center_.x - radius_)) / cell_size_;
        const double fy = (particles[q].y - (center_.y - radius_)) / cell_size_;
        if (fx < 0.0 || fy < 0.0 || fx >= (double)bins_ || fy >= (double)bins_)
            continue;
        (*hist)[(std::size_t)fy * bins_ + (std::size_t)fx] += weights[q];
        total += weights[q];
    }
    const auto bins = bins_;
    const auto cell = cell_size_;
    const Vec2 lo{center_.x - radius_, center_.y - radius_};
    auto area = std::make_shared<std::vector<double>>(cell_area_);
    const double norm = total;
    return [hist, bins, cell, lo, area, norm](const Vec2& a) -> double {
        if (norm <= 0.0) return 0.0;
        const double fx = (a.x - lo.x) / cell;
        const double fy = (a.y - lo.y) / cell;
        if (fx < 0.0 || fy < 0.0 || fx >= (double)bins || fy >= (double)bins)
            return 0.0;
        const std::size_t c = (std::size_t)fy * bins + (std::size_t)fx;
        return (*area)[c] > 0.0 ? (*hist)[c] / (norm * (*area)[c]) : 0.0;
    };
}

UndetectedIntensity phd_init(const FloorPlan& roi, double mu_initial,
                             std::size_t n_particles, Rng& rng) {
    if (mu_initial < 0.0) throw std::invalid_argument("mu_initial must be >= 0");
    UndetectedIntensity out;
    if (mu_initial == 0.0 || n_particles == 0) return out;
    out.particles.reserve(n_particles);
    out.weights.assign(n_particles, mu_initial / (double)n_particles);
    for (std::size_t i = 0; i < n_particles; ++i)
        out.particles.push_back(sample_in_disk(roi.roi_center, roi.roi_radius, rng));
    return out;
}

void phd_predict(UndetectedIntensity& intensity, const FeatureDynamicsParams& dynamics,
                 double mu_birth, const FloorPlan& roi, std::size_t n_birth_particles,
                 Rng& rng) {
    for (double& w : intensity.weights) w *= dynamics.p_survival;
    if (dynamics.sigma_a > 0.0) {
        std::normal_distribution<double> jitter(0.0, dynamics.sigma_a);
        for (Vec2& a : intensity.particles) {
            a.x += jitter(rng);
            a.y += jitter(rng);
        }
    }
    if (mu_birth > 0.0 && n_birth_particles > 0) {
        const double w = mu_birth / (double)n_birth_particles;
        for (std::size_t i = 0; i < n_birth_particles; ++i) {
            intensity.particles.push_back(
                sample_in_disk(roi.roi_center, roi.roi_radius, rng));
            intensity.weights.push_back(w);
        }
    }
}

BirthInfo birth_info(const UndetectedIntensity& predicted, const AgentCloudView& agent,
                     const RoiGrid& grid, const DetectionProbFn& p_detect) {
    BirthInfo out;
    if (predicted.particles.empty()) return out;
    std::vector<double> detected_weights(predicted.weights.size());
    double mu = 0.0;
    for (std::size_t q = 0; q < predicted.particles.size(); ++q) {
        detected_weights[q] = predicted.weights[q] *
                              mean_detection_prob(agent, predicted.particles[q], p_detect);
        mu += detected_weights[q];
    }
    out.mu_n = mu;
    if (mu > 0.0) out.f_n = grid.density(predicted.particles, detected_weights);
    return out;
}

void phd_update(UndetectedIntensity& predicted, const AgentCloudView& agent,
                const DetectionProbFn& p_detect) {
    for (std::size_t q = 0; q < predicted.particles.size(); ++q)
        predicted.weights[q] *=
            1.0 - mean_detection_prob(agent, predicted.particles[q], p_detect);
}

void phd_resample_if_degenerate(UndetectedIntensity& intensity, std::size_t budget,
                                Rng& rng) {
    if (intensity.particles.size() <= budget &&
        effective_sample_size(intensity.weights) >= 0.5 * (double)intensity.particles.size())
        return;
    const double mass = intensity.mass();
    if (mass <= 0.0 || budget == 0) {
        intensity.particles.clear();
        intensity.weights.clear();
        return;
    }
    const auto idx = systematic_resample_indices(intensity.weights, budget, rng);
    std::vector<Vec2> np(budget);
    for (std::size_t i = 0; i < budget; ++i) np[i] = intensity.particles[idx[i]];
    intensity.particles = std::move(np);
    intensity.weights.assign(budget, mass / (double)budget);
}

}  // namespace bpslam
