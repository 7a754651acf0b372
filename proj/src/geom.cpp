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
#include "scensim/geom.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

namespace scensim {

double wrap_angle(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a < 0.0) {
        a += 2.0 * kPi;
    }
    return a - kPi;
}

double angle_diff(double a, double b) {
    return wrap_angle(b - a);
}

// ---------------------------------------------------------------------------
// Polyline2
// ---------------------------------------------------------------------------

Polyline2::Polyline2(std::vector<Vec2> points) : pts_(std::move(points)) {
    cum_.resize(pts_.size());
    if (pts_.empty()) {
        return;
    }
    cum_[0] = 0.0;
    for (std::size_t i = 1; i < pts_.size(); ++i) {
        cum_[i] = cum_[i - 1] + (pts_[i] - pts_[i - 1]).norm();
    }
}

FrenetCoord Polyline2::project(Vec2 p) const {
    return project_window(p, 0.0, std::numeric_limits<double>::infinity());
}

FrenetCoord Polyline2::project_window(Vec2 p, double s_lo, double s_hi) const {
    FrenetCoord best{0.0, 0.0};
    if (pts_.empty()) {
        return best;
    }
    if (pts_.size() == 1) {
        Vec2 off = p - pts_[0];
        return {0.0, off.norm()};
    }
    std::size_t first = 0;
    std::size_t last = pts_.size() - 1;
    if (s_lo > 0.0) {
        auto it = std::upper_bound(cum_.begin(), cum_.end(), s_lo);
        first = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
    }
    if (s_hi < cum_.back()) {
        auto it = std::lower_bound(cum_.begin(), cum_.end(), s_hi);
        last = std::min<std::size_t>(static_cast<std::size_t>(it - cum_.begin()) + 1, pts_.size() - 1);
    }
    double best_dist2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = first; i + 1 <= last; ++i) {
        Vec2 a = pts_[i], b = pts_[i + 1];
        Vec2 ab = b - a;
        double len2 = ab.norm2();
        if (len2 == 0.0) {
            continue;
        }
        double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
        Vec2 foot = a + ab * t;
        double dist2 = (p - foot).norm2();
        if (dist2 < best_dist2) {
            best_dist2 = dist2;
            best.s = cum_[i] + std::sqrt(len2) * t;
            // signed perpendicular offset from the segment's line;
            // positive iff p is left of the segment direction
            best.d = ab.cross(p - a) / std::sqrt(len2);
        }
    }
    return best;
}

Vec2 Polyline2::point_at(double s) const {
    if (pts_.empty()) {
        return {};
    }
    if (pts_.size() == 1 || s <= 0.0) {
        return pts_.front();
    }
    if (s >= length()) {
        return pts_.back();
    }
    auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    std::size_t i = static_cast<std::size_t>(it - cum_.begin()) - 1;
    i = std::min(i, pts_.size() - 2);
    double seg_len = cum_[i + 1] - cum_[i];
    double t = seg_len > 0.0 ? (s - cum_[i]) / seg_len : 0.0;
    return pts_[i] + (pts_[i + 1] - pts_[i]) * t;
}

Vec2 Polyline2::tangent_at(double s) const {
    if (pts_.size() < 2) {
        return {1.0, 0.0};
    }
    double cl = std::clamp(s, 0.0, length());
    auto it = std::upper_bound(cum_.begin(), cum_.end(), cl);
    std::size_t i = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
    i = std::min(i, pts_.size() - 2);
    // skip zero-length segments
    while (i + 2 < pts_.size() && (pts_[i + 1] - pts_[i]).norm2() == 0.0) {
        ++i;
    }
    return (pts_[i + 1] - pts_[i]).normalized();
}

double Polyline2::heading_at(double s) const {
    Vec2 t = tangent_at(s);
    return std::atan2(t.y, t.x);
}

Vec2 Polyline2::from_frenet(FrenetCoord f) const {
    Vec2 base = point_at(f.s);
    Vec2 n = tangent_at(f.s).perp();
    return base + n * f.d;
}

// ---------------------------------------------------------------------------
// Polygons
// ---------------------------------------------------------------------------

namespace {
constexpr double kBoundaryEps = 1e-12;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len2 = ab.norm2();
    if (len2 == 0.0) {
        return (p - a).norm();
    }
    double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

bool point_in_polygon(const std::vector<Vec2>& ring, Vec2 p) {
    std::size_t n = ring.size();
    if (n < 3) {
        return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (point_segment_distance(p, ring[i], ring[(i + 1) % n]) <= kBoundaryEps) {
            return true;
        }
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        Vec2 a = ring[j], b = ring[i];
        bool crosses = (b.y > p.y) != (a.y > p.y);
        if (crosses) {
            double x_at = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
            if (p.x < x_at) {
                inside = !inside;
            }
        }
    }
    return inside;
}

namespace {

int orientation_sign(Vec2 a, Vec2 b, Vec2 c) {
    double v = (b - a).cross(c - a);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

}  // namespace

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    int o1 = orientation_sign(a, b, c);
    int o2 = orientation_sign(a, b, d);
    int o3 = orientation_sign(c, d, a);
    int o4 = orientation_sign(c, d, b);
    return o1 * o2 < 0 && o3 * o4 < 0;
}

bool polygon_is_simple(const std::vector<Vec2>& ring) {
    std::size_t n = ring.size();
    if (n < 3) {
        return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 a = ring[i], b = ring[(i + 1) % n];
        if ((b - a).norm2() == 0.0) {
            return false;
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            // adjacent edges share an endpoint, skip them
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) {
                continue;
            }
            Vec2 c = ring[j], d = ring[(j + 1) % n];
            if (segments_intersect(a, b, c, d)) {
                return false;
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Oriented rectangles
// ---------------------------------------------------------------------------

std::array<Vec2, 4> Obb::corners() const {
    Vec2 fwd = Vec2{1.0, 0.0}.rotated(heading) * (length * 0.5);
    Vec2 side = Vec2{0.0, 1.0}.rotated(heading) * (width * 0.5);
    return {center + fwd + side, center - fwd + side, center - fwd - side, center + fwd - side};
}

bool Obb::contains(Vec2 p) const {
    Vec2 local = (p - center).rotated(-heading);
    return std::abs(local.x) <= length * 0.5 && std::abs(local.y) <= width * 0.5;
}

bool obb_overlap(const Obb& a, const Obb& b) {
    auto ca = a.corners();
    auto cb = b.corners();
    const std::array<Vec2, 4> axes = {
        Vec2{1.0, 0.0}.rotated(a.heading),
        Vec2{0.0, 1.0}.rotated(a.heading),
        Vec2{1.0, 0.0}.rotated(b.heading),
        Vec2{0.0, 1.0}.rotated(b.heading),
    };
    for (Vec2 axis : axes) {
        double amin = std::numeric_limits<double>::infinity(), amax = -amin;
        double bmin = amin, bmax = -amin;
        for (Vec2 c : ca) {
            double v = c.dot(axis);
            amin = std::min(amin, v);
            amax = std::max(amax, v);
        }
        for (Vec2 c : cb) {
            double v = c.dot(axis);
            bmin = std::min(bmin, v);
            bmax = std::max(bmax, v);
        }
        if (amax < bmin || bmax < amin) {
            return false;
        }
    }
    return true;
}

std::optional<double> ray_segment_hit(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b, double max_dist) {
    Vec2 v = b - a;
    double denom = dir.cross(v);
    if (denom == 0.0) {
        return std::nullopt;  // parallel (collinear grazing treated as miss)
    }
    Vec2 w = a - origin;
    double t = w.cross(v) / denom;   // distance along ray
    double u = w.cross(dir) / denom; // parameter on segment
    if (t < 0.0 || t > max_dist || u < 0.0 || u > 1.0) {
        return std::nullopt;
    }
    return t;
}

std::optional<double> ray_obb_hit(Vec2 origin, Vec2 dir, const Obb& box, double max_dist) {
    if (box.contains(origin)) {
        return 0.0;
    }
    auto c = box.corners();
    std::optional<double> best;
    for (int i = 0; i < 4; ++i) {
        auto hit = ray_segment_hit(origin, dir, c[i], c[(i + 1) % 4], max_dist);
        if (hit && (!best || *hit < *best)) {
            best = hit;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// DetRng
// ---------------------------------------------------------------------------

std::uint64_t DetRng::next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t DetRng::next_below(std::uint64_t n) {
    assert(n > 0);
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % n);
    std::uint64_t v = next_u64();
    while (v >= limit) {
        v = next_u64();
    }
    return v % n;
}

double DetRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double DetRng::uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

double DetRng::next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) {
        u1 = next_double();
    }
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace scensim
