#include <doctest.h>

#include <cmath>
#include <vector>

#include "bpslam/phd.hpp"

using namespace bpslam;

namespace {

FloorPlan disk_roi() {
    FloorPlan plan;
    plan.roi_center = {7.5, 7.5};
    plan.roi_radius = 30.0;
    return plan;
}

}  // namespace

TEST_SUITE_BEGIN("phd");

TEST_CASE("init mass and support") {
    const FloorPlan roi = disk_roi();
    Rng rng(1);
    const UndetectedIntensity u = phd_init(roi, 6.0, 20000, rng);
    CHECK(std::abs(u.mass() - 6.0) < 1e-12);
    for (const Vec2& p : u.particles) {
        CHECK(distance(p, roi.roi_center) <= roi.roi_radius + 1e-12);
    }

    const UndetectedIntensity empty = phd_init(roi, 0.0, 20000, rng);
    CHECK(empty.mass() == 0.0);
    CHECK(empty.particles.empty());
}

TEST_CASE("init density is uniform over the disk") {
    // Chi-square on a 10x10 grid over the bounding square, counting only
    // cells fully inside the disk so every counted cell has equal expected
    // occupancy.
    const FloorPlan roi = disk_roi();
    Rng rng(2);
    const std::size_t n = 1000000;
    const UndetectedIntensity u = phd_init(roi, 6.0, n, rng);
    const double cell = 2.0 * roi.roi_radius / 10.0;
    std::vector<std::size_t> counts(100, 0);
    for (const Vec2& p : u.particles) {
        const int ix = std::min(9, std::max(0, (int)((p.x - (roi.roi_center.x - 30.0)) / cell)));
        const int iy = std::min(9, std::max(0, (int)((p.y - (roi.roi_center.y - 30.0)) / cell)));
        counts[(std::size_t)(iy * 10 + ix)]++;
    }
    double chi2 = 0.0;
    std::size_t dof = 0;
    const double disk_area = std::numbers::pi * 30.0 * 30.0;
    for (int iy = 0; iy < 10; ++iy) {
        for (int ix = 0; ix < 10; ++ix) {
            // Farthest corner of the cell from the center decides containment.
            const double cx = roi.roi_center.x - 30.0 + (ix + (ix < 5 ? 0 : 1)) * cell;
            const double cy = roi.roi_center.y - 30.0 + (iy + (iy < 5 ? 0 : 1)) * cell;
            if (std::hypot(cx - roi.roi_center.x, cy - roi.roi_center.y) > 30.0) continue;
            const double expected = n * cell * cell / disk_area;
            const double diff = counts[(std::size_t)(iy * 10 + ix)] - expected;
            chi2 += diff * diff / expected;
            ++dof;
        }
    }
    // dof cells, chi-square 99th percentile is roughly dof + 3.3 sqrt(2 dof).
    CHECK(dof >= 50);
    CHECK(chi2 < dof + 3.3 * std::sqrt(2.0 * dof));
}

TEST_CASE("predict scales mass by survival and adds birth") {
    const FloorPlan roi = disk_roi();
    Rng rng(3);
    UndetectedIntensity u = phd_init(roi, 6.0, 5000, rng);

    FeatureDynamicsParams keep;
    keep.p_survival = 1.0;
    phd_predict(u, keep, 0.0, roi, 0, rng);
    CHECK(u.mass() == doctest::Approx(6.0).epsilon(1e-12));

    FeatureDynamicsParams decay;  // P_s = 0.999
    phd_predict(u, decay, 1e-4, roi, 64, rng);
    CHECK(u.mass() == doctest::Approx(6.0 * 0.999 + 1e-4).epsilon(1e-12));
    for (double w : u.weights) CHECK(w >= 0.0);
}

TEST_CASE("birth info with constant detection probability") {
    const FloorPlan roi = disk_roi();
    Rng rng(4);
    const UndetectedIntensity u = phd_init(roi, 6.0, 20000, rng);
    const RoiGrid grid(roi, 64);

    const std::vector<Vec2> agent_pos = {{7.5, 7.5}};
    const std::vector<double> agent_w = {1.0};
    const AgentCloudView agent{&agent_pos, &agent_w};

    const BirthInfo high = birth_info(u, agent, grid,
                                      [](const Vec2&, const Vec2&) { return 0.95; });
    CHECK(high.mu_n == doctest::Approx(5.7).epsilon(1e-12));

    const BirthInfo none = birth_info(u, agent, grid,
                                      [](const Vec2&, const Vec2&) { return 0.0; });
    CHECK(none.mu_n == 0.0);
}

TEST_CASE("birth intensity with a two-region detection profile") {
    // P_d is 0.8 left of the center line and 0.2 right of it; by symmetry of
    // the uniform intensity, mu_n = mass * (0.8 + 0.2) / 2.
    const FloorPlan roi = disk_roi();
    Rng rng(5);
    const UndetectedIntensity u = phd_init(roi, 6.0, 400000, rng);
    const RoiGrid grid(roi, 64);
    const std::vector<Vec2> agent_pos = {{7.5, 7.5}};
    const std::vector<double> agent_w = {1.0};
    const AgentCloudView agent{&agent_pos, &agent_w};

    const BirthInfo split = birth_info(u, agent, grid, [](const Vec2&, const Vec2& a) {
        return a.x < 7.5 ? 0.8 : 0.2;
    });
    CHECK(split.mu_n == doctest::Approx(3.0).epsilon(0.01));
}

TEST_CASE("missed-detection update scales mass") {
    const FloorPlan roi = disk_roi();
    Rng rng(6);
    UndetectedIntensity u = phd_init(roi, 6.0, 5000, rng);
    const std::vector<Vec2> agent_pos = {{7.5, 7.5}};
    const std::vector<double> agent_w = {1.0};
    const AgentCloudView agent{&agent_pos, &agent_w};

    phd_update(u, agent, [](const Vec2&, const Vec2&) { return 0.95; });
    CHECK(u.mass() == doctest::Approx(0.3).epsilon(1e-9));

    UndetectedIntensity v = phd_init(roi, 6.0, 5000, rng);
    phd_update(v, agent, [](const Vec2&, const Vec2&) { return 0.0; });
    CHECK(v.mass() == doctest::Approx(6.0).epsilon(1e-12));

    UndetectedIntensity w = phd_init(roi, 6.0, 5000, rng);
    phd_update(w, agent, [](const Vec2&, const Vec2&) { return 0.5; });
    phd_update(w, agent, [](const Vec2&, const Vec2&) { return 0.5; });
    CHECK(w.mass() == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("mass recursion over many steps") {
    const FloorPlan roi = disk_roi();
    Rng rng(7);
    UndetectedIntensity u = phd_init(roi, 6.0, 2000, rng);
    const std::vector<Vec2> agent_pos = {{7.5, 7.5}};
    const std::vector<double> agent_w = {1.0};
    const AgentCloudView agent{&agent_pos, &agent_w};
    FeatureDynamicsParams dyn;  // P_s = 0.999

    const double factor = 0.999 * (1.0 - 0.95);
    for (int n = 1; n <= 20; ++n) {
        phd_predict(u, dyn, 0.0, roi, 0, rng);
        phd_update(u, agent, [](const Vec2&, const Vec2&) { return 0.95; });
        CHECK(std::abs(u.mass() - 6.0 * std::pow(factor, n)) < 1e-9);
    }
}

TEST_CASE("resampling preserves mass and restores the budget") {
    const FloorPlan roi = disk_roi();
    Rng rng(8);
    UndetectedIntensity u = phd_init(roi, 6.0, 4000, rng);
    // Skew the weights badly so the effective size collapses.
    for (std::size_t i = 0; i < u.weights.size(); ++i) {
        u.weights[i] = (i == 0) ? 1.0 : 1e-12;
    }
    const double mass_before = u.mass();
    phd_resample_if_degenerate(u, 4000, rng);
    CHECK(u.particles.size() == 4000);
    CHECK(u.mass() == doctest::Approx(mass_before).epsilon(1e-9));
    const double ess = effective_sample_size(u.weights);
    CHECK(ess == doctest::Approx(4000.0).epsilon(1e-9));
}

TEST_CASE("effective sample size is scale invariant") {
    const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
    std::vector<double> scaled = w;
    for (double& v : scaled) v *= 1e6;
    CHECK(effective_sample_size(w) == doctest::Approx(effective_sample_size(scaled)));
    const std::vector<double> uniform(100, 0.25);
    CHECK(effective_sample_size(uniform) == doctest::Approx(100.0));
}

TEST_SUITE_END();
