#include <doctest.h>

#include <cmath>
#include <random>

#include "bpslam/geometry.hpp"

using namespace bpslam;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("mirror across axis-aligned and diagonal lines") {
    const WallSegment x_axis{{0, 0}, {1, 0}};
    Vec2 r = mirror_across_segment({1, 2}, x_axis);
    CHECK(r.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.y == doctest::Approx(-2.0).epsilon(1e-12));

    const WallSegment x5{{5, 0}, {5, 1}};
    r = mirror_across_segment({3, 1}, x5);
    CHECK(r.x == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(r.y == doctest::Approx(1.0).epsilon(1e-12));

    const WallSegment diag{{0, 0}, {1, 1}};
    r = mirror_across_segment({2, 0}, diag);
    CHECK(r.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.y == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("degenerate wall raises") {
    const WallSegment bad{{1, 1}, {1, 1}};
    CHECK_THROWS_AS(mirror_across_segment({0, 0}, bad), InvalidGeometryError);
}

TEST_CASE("reflection is an involution on random instances") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int t = 0; t < 200; ++t) {
        WallSegment w{{u(rng), u(rng)}, {u(rng), u(rng)}};
        if (distance(w.p_start, w.p_end) < 1e-6) continue;
        const Vec2 p{u(rng), u(rng)};
        const Vec2 back = mirror_across_segment(mirror_across_segment(p, w), w);
        CHECK(distance(back, p) < 1e-12);
    }
}

TEST_CASE("mirror distance equals the specular path length") {
    // For p and a on the same side of the wall line, ||p - mirror(a)|| must
    // equal the length of the broken path p -> wall -> a through the optimal
    // bounce point, found here by dense search along the line.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int t = 0; t < 50; ++t) {
        WallSegment w{{u(rng), u(rng)}, {u(rng), u(rng)}};
        const Vec2 d = w.p_end - w.p_start;
        if (d.norm() < 1e-3) continue;
        const Vec2 n{-d.y / d.norm(), d.x / d.norm()};
        // Place both points strictly on the positive side of the line.
        auto side_point = [&](double along, double off) {
            return w.p_start + d * along + n * off;
        };
        std::uniform_real_distribution<double> a01(0.0, 1.0);
        const Vec2 p = side_point(a01(rng), 0.5 + 4.0 * a01(rng));
        const Vec2 a = side_point(a01(rng), 0.5 + 4.0 * a01(rng));
        const double mirror_len = distance(p, mirror_across_segment(a, w));
        auto path = [&](double s) {
            const Vec2 q = w.p_start + d * s;
            return distance(p, q) + distance(q, a);
        };
        // The bounce point lies between the projections of p and a, i.e.
        // within [0, 1] along the segment; ternary-search the convex path
        // length to machine precision.
        double lo = -1.0, hi = 2.0;
        for (int it = 0; it < 300; ++it) {
            const double m1 = lo + (hi - lo) / 3.0;
            const double m2 = hi - (hi - lo) / 3.0;
            if (path(m1) < path(m2))
                hi = m2;
            else
                lo = m1;
        }
        const double best = path(0.5 * (lo + hi));
        CHECK(std::abs(mirror_len - best) < 1e-9);
    }
}

TEST_CASE("anchor map basics") {
    FloorPlan plan;
    plan.roi_center = {0, 0};
    plan.roi_radius = 30.0;
    plan.walls = {{{-5, -5}, {5, -5}}};
    AnchorMap one = build_anchor_map({{0, 0}}, plan);
    REQUIRE(one.num_pas() == 1);
    REQUIRE(one.va_positions[0].size() == 1);
    CHECK(distance(one.va_positions[0][0], {0, -10}) < 1e-12);

    // A PA lying on a wall line is its own mirror image; deduplicated.
    plan.walls.push_back({{0, -5}, {0, 5}});
    AnchorMap two = build_anchor_map({{0, 0}}, plan);
    CHECK(two.va_positions[0].size() == 1);
}

TEST_CASE("anchor map count bound") {
    FloorPlan plan;
    plan.roi_center = {7.5, 7.5};
    plan.roi_radius = 30.0;
    plan.walls = {{{0, 0}, {15, 0}},
                  {{15, 0}, {15, 15}},
                  {{15, 15}, {0, 15}},
                  {{0, 15}, {0, 0}}};
    AnchorMap m = build_anchor_map({{2, 5}, {13, 8}}, plan);
    REQUIRE(m.num_pas() == 2);
    CHECK(m.va_positions[0].size() <= 4);
    CHECK(m.va_positions[1].size() <= 4);
}

TEST_CASE("trajectory resampling") {
    const auto short_leg = generate_trajectory({{0, 0}, {1, 0}}, 0.5);
    REQUIRE(short_leg.size() == 3);
    CHECK(distance(short_leg[0], {0, 0}) < 1e-12);
    CHECK(distance(short_leg[1], {0.5, 0}) < 1e-12);
    CHECK(distance(short_leg[2], {1, 0}) < 1e-12);

    const auto long_leg = generate_trajectory({{0, 0}, {0, 9}}, 0.01);
    CHECK(long_leg.size() == 901);

    const auto l_shape = generate_trajectory({{0, 0}, {2, 0}, {2, 1}}, 0.25);
    bool corner_found = false;
    for (const Vec2& p : l_shape)
        if (distance(p, {2, 0}) < 1e-12) corner_found = true;
    CHECK(corner_found);
    for (std::size_t i = 1; i < l_shape.size(); ++i) {
        CHECK(distance(l_shape[i - 1], l_shape[i]) == doctest::Approx(0.25).epsilon(1e-12));
    }
}

TEST_CASE("trajectory rejects coincident waypoints") {
    CHECK_THROWS_AS(generate_trajectory({{1, 1}, {1, 1}}, 0.1), InvalidGeometryError);
}

TEST_SUITE_END();
