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

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "scensim/geom.hpp"

namespace scensim {

enum class LineType { Broken, Solid, RoadEdge };

struct Lane {
    std::string id;
    std::vector<Vec3> centerline;  // >= 2 points
    std::vector<Vec2> polygon;     // simple closed ring, no repeated endpoint
    std::optional<double> speed_limit;  // m/s
    std::vector<std::string> entry_lanes;
    std::vector<std::string> exit_lanes;
    std::vector<std::string> left_neighbors;
    std::vector<std::string> right_neighbors;

    bool operator==(const Lane&) const = default;
};

struct LaneLine {
    std::string id;
    std::vector<Vec3> polyline;  // >= 2 points
    LineType type = LineType::Broken;

    bool operator==(const LaneLine&) const = default;
};

using MapFeature = std::variant<Lane, LaneLine>;
using MapFeatures = std::map<std::string, MapFeature>;

const char* line_type_name(LineType t);
std::optional<LineType> line_type_from_name(const std::string& name);

struct MapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Spatial index over a feature table. Immutable once built; all queries are
/// const and safe to call concurrently.
class MapIndex {
public:
    static constexpr double kDefaultCellSize = 16.0;

    MapIndex() = default;
    explicit MapIndex(const MapFeatures& features, double cell_size = kDefaultCellSize);

    bool empty() const { return lanes_.empty() && lines_.empty(); }
    std::size_t lane_count() const { return lanes_.size(); }

    const Lane& lane(const std::string& id) const;
    bool has_lane(const std::string& id) const { return lane_lookup_.count(id) > 0; }
    const std::vector<Lane>& lanes() const { return lanes_; }
    const std::vector<LaneLine>& lane_lines() const { return lines_; }

    /// Cached 2D centerline of a lane.
    const Polyline2& centerline(const std::string& id) const;

    /// exit_lanes of the lane, verbatim. Throws MapError on unknown id.
    const std::vector<std::string>& lane_successors(const std::string& id) const;

    /// Lane minimizing |d| of the Frenet projection; ties broken by smaller s
    /// then lexicographic id. Throws MapError on an empty map.
    std::string nearest_lane(Vec2 p) const;

    /// True iff some lane polygon contains the point.
    bool in_drivable_area(Vec2 p) const;

    /// Lane ids whose grid cells cover the point's cell and its ring
    /// neighborhood of the given radius (in cells).
    std::vector<std::size_t> candidates_near(Vec2 p, int ring) const;

private:
    double cell_size_ = kDefaultCellSize;
    std::vector<Lane> lanes_;
    std::vector<LaneLine> lines_;
    std::vector<Polyline2> centerlines_;  // parallel to lanes_
    std::unordered_map<std::string, std::size_t> lane_lookup_;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> grid_;

    std::int64_t cell_key(int cx, int cy) const;
    void register_lane(std::size_t idx);
};

/// Frenet projection onto the lane centerline (2D; z carried but ignored).
FrenetCoord frenet_project(const Lane& lane, Vec2 p);

/// Even-odd containment on the lane polygon; boundary counts as inside.
bool point_on_lane(const Lane& lane, Vec2 p);

/// True iff the motion segment properly crosses any segment of the line.
bool crosses_line(Vec2 seg_a, Vec2 seg_b, const LaneLine& line);

struct LaneValidationIssue {
    std::string feature_id;
    std::string what;
};

/// Structural checks for a feature table: polyline sizes, nonzero spacing,
/// simple closed polygons, connectivity resolution.
std::vector<LaneValidationIssue> validate_map_features(const MapFeatures& features);

}  // namespace scensim
