#include "bpslam/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace bpslam {

std::vector<MeasurementFrame> generate_frame(const Scenario& scenario, std::size_t n,
                                             Rng& rng, FrameStats* stats) {
    if (n >= scenario.trajectory.size()) {
        throw std::out_of_range("generate_frame: step index beyond trajectory");
    }
    const Vec2 x = scenario.trajectory[n];
    const SensorModel& sensor = scenario.generator;
    std::bernoulli_distribution detect(sensor.p_detect);
    std::normal_distribution<double> noise(0.0, scenario.true_sigma);
    std::poisson_distribution<int> clutter_count(sensor.mu_fa);
    std::uniform_real_distribution<double> clutter_range(0.0, sensor.fa_range_max);

    std::vector<MeasurementFrame> frames(scenario.anchors.num_pas());
    for (std::size_t j = 0; j < frames.size(); ++j) {
        MeasurementFrame& frame = frames[j];
        for (const Vec2& feature : scenario.anchors.features_of(j)) {
            if (!detect(rng)) continue;
            double z = distance(x, feature) + noise(rng);
            if (z < 0.0) {
                z = 0.0;
                if (stats != nullptr) ++stats->clipped_ranges;
            }
            frame.push_back({z, scenario.true_sigma});
        }
        const int n_fa = clutter_count(rng);
        for (int i = 0; i < n_fa; ++i) {
            frame.push_back({clutter_range(rng), scenario.true_sigma});
        }
        std::shuffle(frame.begin(), frame.end(), rng);
    }
    return frames;
}

Scenario make_default_scenario(std::size_t n_steps) {
    Scenario s;
    s.plan.walls = {
        {{0.0, 0.0}, {15.0, 0.0}},    // south
        {{15.0, 0.0}, {15.0, 15.0}},  // east
        {{15.0, 15.0}, {0.0, 15.0}},  // north
        {{0.0, 15.0}, {0.0, 0.0}},    // west
        {{13.0, 6.0}, {13.0, 10.0}},  // interior wall through PA 2
    };
    s.plan.roi_center = {7.5, 7.5};
    s.plan.roi_radius = 30.0;
    const std::vector<Vec2> pas = {{2.0, 5.0}, {13.0, 8.0}};
    s.anchors = build_anchor_map(pas, s.plan);

    const Vec2 center{7.5, 7.5};
    const double radius = 4.5;
    s.trajectory.resize(n_steps);
    // Start at the top of the circle: the initial position is then well away
    // from the line through the two PAs, so the mirror-image solution of the
    // range geometry falls outside the initial agent prior.
    for (std::size_t n = 0; n < n_steps; ++n) {
        const double phi = 0.5 * std::numbers::pi +
                           2.0 * std::numbers::pi * static_cast<double>(n) /
                               static_cast<double>(n_steps);
        s.trajectory[n] = {center.x + radius * std::cos(phi),
                           center.y + radius * std::sin(phi)};
    }
    s.generator.p_detect = 0.95;
    s.generator.mu_fa = 1.0;
    s.generator.fa_range_max = 30.0;
    s.true_sigma = 0.1;
    s.seed = 1;
    return s;
}

}  // namespace bpslam
