#pragma once

#include <cstdint>
#include <vector>

#include "bpslam/geometry.hpp"
#include "bpslam/models.hpp"

namespace bpslam {

/// Ground truth and generator parameters for one synthetic experiment.
struct Scenario {
    FloorPlan plan;
    AnchorMap anchors;                // ground-truth PA + VA positions
    std::vector<Vec2> trajectory;     // agent position per time step
    SensorModel generator;            // true P_d, mu_FA, clutter support
    double true_sigma = 0.1;          // measurement noise std, m
    std::uint64_t seed = 1;
};

struct FrameStats {
    std::size_t clipped_ranges = 0;  // negative draws clipped to 0
};

/// Measurements of all PAs at one time step (outer index: PA).
std::vector<MeasurementFrame> generate_frame(const Scenario& scenario, std::size_t n,
                                             Rng& rng, FrameStats* stats = nullptr);

/// Shipped two-PA scenario: a 15 m x 15 m room plus one interior wall
/// collinear with PA 2, so the anchor map has 6 features for PA 1 and 5 for
/// PA 2. The agent moves on a circle of radius 4.5 m about the room center.
Scenario make_default_scenario(std::size_t n_steps = 900);

}  // namespace bpslam
