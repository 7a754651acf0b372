/*
 * Copyright 2026-present scensim contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace scensim {

constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double k) const { return {x * k, y * k}; }
    bool operator==(const Vec2&) const = default;

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
    Vec2 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{1.0, 0.0};
    }
    Vec2 rotated(double angle) const {
        double c = std::cos(angle), s = std::sin(angle);
        return {c * x - s * y, s * x + c * y};
    }
    // 90 degrees counter-clockwise.
    Vec2 perp() const { return {-y, x}; }
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool operator==(const Vec3&) const = default;
    Vec2 xy() const { return {x, y}; }
};

/// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

/// Smallest signed difference b - a, wrapped into [-pi, pi).
double angle_diff(double a, double b);

// ---------------------------------------------------------------------------
// Polyline with cached arc length, the basis of all Frenet-frame queries.
// ---------------------------------------------------------------------------

struct FrenetCoord {
    double s = 0.0;  // arc length along the polyline, clamped to [0, length]
    double d = 0.0;  // signed lateral offset, > 0 left of travel direction
};

class Polyline2 {
public:
    Polyline2() = default;
    explicit Polyline2(std::vector<Vec2> points);

    bool empty() const { return pts_.empty(); }
    std::size_t size() const { return pts_.size(); }
    const std::vector<Vec2>& points() const { return pts_; }
    double length() const { return cum_.empty() ? 0.0 : cum_.back(); }

    /// Globally nearest point: scans all segments, clamps the perpendicular
    /// foot to segment ends, ties resolved toward smaller s.
    FrenetCoord project(Vec2 p) const;

    /// Like project but restricted to the arc-length window [s_lo, s_hi];
    /// used by hot loops that only care about a stretch ahead.
    FrenetCoord project_window(Vec2 p, double s_lo, double s_hi) const;

    /// Position at arc length s (clamped to [0, length]).
    Vec2 point_at(double s) const;

    /// Unit tangent of the segment containing arc length s.
    Vec2 tangent_at(double s) const;

    /// Heading (atan2 of tangent) at arc length s.
    double heading_at(double s) const;

    /// Inverse of project for interior feet: walk s, offset d along the left normal.
    Vec2 from_frenet(FrenetCoord f) const;

private:
    std::vector<Vec2> pts_;
    std::vector<double> cum_;  // cumulative arc length, cum_[0] = 0
};

// ---------------------------------------------------------------------------
// Polygons
// ---------------------------------------------------------------------------

/// Even-odd point-in-polygon test on a closed ring (last->first edge implied).
/// Points on the boundary count as inside.
bool point_in_polygon(const std::vector<Vec2>& ring, Vec2 p);

/// True if the closed ring has no two non-adjacent edges that properly
/// intersect and no repeated interior touching (simple polygon check).
bool polygon_is_simple(const std::vector<Vec2>& ring);

/// Distance from a point to a segment.
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

/// Proper segment intersection: interiors cross (shared endpoints or pure
/// collinear overlap do not count).
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

// ---------------------------------------------------------------------------
// Oriented rectangles (vehicle footprints)
// ---------------------------------------------------------------------------

struct Obb {
    Vec2 center;
    double heading = 0.0;
    double length = 0.0;  // extent along heading
    double width = 0.0;   // extent across heading

    /// Corners in counter-clockwise order.
    std::array<Vec2, 4> corners() const;
    bool contains(Vec2 p) const;
};

/// Separating-axis overlap test for two oriented rectangles.
bool obb_overlap(const Obb& a, const Obb& b);

/// First hit of the ray (origin, unit dir) against the rectangle boundary,
/// as a distance along the ray; nullopt if no hit within max_dist.
std::optional<double> ray_obb_hit(Vec2 origin, Vec2 dir, const Obb& box, double max_dist);

/// First hit of the ray against a segment, as a distance along the ray.
std::optional<double> ray_segment_hit(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b, double max_dist);

// ---------------------------------------------------------------------------
// Deterministic randomness helpers (identical streams on every platform)
// ---------------------------------------------------------------------------

/// splitmix64; used wherever reproducibility across standard libraries matters.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    /// Uniform in [0, n) via rejection sampling.
    std::uint64_t next_below(std::uint64_t n);
    /// Uniform in [0, 1).
    double next_double();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Standard normal (Box-Muller, always consumes two draws).
    double next_gaussian();

private:
    std::uint64_t state_;
};

/// Deterministic Fisher-Yates shuffle driven by DetRng.
template <typename T>
void det_shuffle(std::vector<T>& v, DetRng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace scensim
