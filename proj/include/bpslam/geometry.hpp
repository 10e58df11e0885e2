#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace bpslam {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

struct InvalidGeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A flat reflecting surface, given by its two endpoints.
struct WallSegment {
    Vec2 p_start;
    Vec2 p_end;
};

/// Walls plus the circular region of interest all priors live on.
struct FloorPlan {
    std::vector<WallSegment> walls;
    Vec2 roi_center;
    double roi_radius = 30.0;
};

/// Physical anchors and, per anchor, the virtual anchors obtained by
/// mirroring across the walls.
struct AnchorMap {
    std::vector<Vec2> pa_positions;
    std::vector<std::vector<Vec2>> va_positions;  // [pa index][va index]

    std::size_t num_pas() const { return pa_positions.size(); }

    /// PA followed by its VAs; the full feature set of anchor j.
    std::vector<Vec2> features_of(std::size_t j) const {
        std::vector<Vec2> out;
        out.push_back(pa_positions.at(j));
        for (const Vec2& v : va_positions.at(j)) out.push_back(v);
        return out;
    }
};

/// Reflects a point across the infinite line supporting the wall segment.
Vec2 mirror_across_segment(const Vec2& point, const WallSegment& wall);

/// One first-order VA per (PA, wall) pair; positions coinciding with the PA
/// or an earlier VA (within 1e-9 m) are dropped.
AnchorMap build_anchor_map(const std::vector<Vec2>& pas, const FloorPlan& plan);

/// Resamples the waypoint polyline at uniform arc-length spacing. The first
/// waypoint is always included; interior waypoints are hit exactly only when
/// the leg length is a multiple of the step.
std::vector<Vec2> generate_trajectory(const std::vector<Vec2>& waypoints,
                                      double step_length);

}  // namespace bpslam
