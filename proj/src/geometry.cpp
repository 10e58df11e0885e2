#include "bpslam/geometry.hpp"

#include <cmath>

namespace bpslam {

namespace {
constexpr double kDedupTol = 1e-9;
}

Vec2 mirror_across_segment(const Vec2& point, const WallSegment& wall) {
    const Vec2 d = wall.p_end - wall.p_start;
    const double len2 = d.dot(d);
    if (len2 == 0.0)
        throw InvalidGeometryError("wall segment has zero length");
    const Vec2 rel = point - wall.p_start;
    const double t = rel.dot(d) / len2;
    const Vec2 foot = wall.p_start + t * d;
    return 2.0 * foot - point;
}

AnchorMap build_anchor_map(const std::vector<Vec2>& pas, const FloorPlan& plan) {
    if (pas.empty())
        throw InvalidGeometryError("anchor map needs at least one PA");
    AnchorMap map;
    map.pa_positions = pas;
    map.va_positions.resize(pas.size());
    for (std::size_t j = 0; j < pas.size(); ++j) {
        auto& vas = map.va_positions[j];
        for (const WallSegment& wall : plan.walls) {
            const Vec2 va = mirror_across_segment(pas[j], wall);
            bool dup = distance(va, pas[j]) < kDedupTol;
            for (const Vec2& prev : vas)
                dup = dup || distance(va, prev) < kDedupTol;
            if (!dup) vas.push_back(va);
        }
    }
    return map;
}

std::vector<Vec2> generate_trajectory(const std::vector<Vec2>& waypoints,
                                      double step_length) {
    if (waypoints.size() < 2)
        throw InvalidGeometryError("trajectory needs at least two waypoints");
    if (step_length <= 0.0)
        throw InvalidGeometryError("step length must be positive");

    std::vector<Vec2> out;
    out.push_back(waypoints.front());
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
        const Vec2 a = waypoints[i];
        const Vec2 b = waypoints[i + 1];
        const double len = distance(a, b);
        if (len < kDedupTol)
            throw InvalidGeometryError("coincident consecutive waypoints");
        // Snap the leg to the nearest whole number of steps so corners are
        // hit exactly; spacing equals step_length when len is a multiple.
        const auto n_seg =
            std::max<std::size_t>(1, (std::size_t)std::llround(len / step_length));
        for (std::size_t s = 1; s <= n_seg; ++s) {
            const double t = double(s) / double(n_seg);
            out.push_back(a + t * (b - a));
        }
    }
    return out;
}

}  // namespace bpslam
