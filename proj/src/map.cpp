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
#include "scensim/map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scensim {

const char* line_type_name(LineType t) {
    switch (t) {
        case LineType::Broken: return "broken";
        case LineType::Solid: return "solid";
        case LineType::RoadEdge: return "road_edge";
    }
    return "broken";
}

std::optional<LineType> line_type_from_name(const std::string& name) {
    if (name == "broken") return LineType::Broken;
    if (name == "solid") return LineType::Solid;
    if (name == "road_edge") return LineType::RoadEdge;
    return std::nullopt;
}

namespace {

std::vector<Vec2> to_2d(const std::vector<Vec3>& pts) {
    std::vector<Vec2> out;
    out.reserve(pts.size());
    for (const Vec3& p : pts) {
        out.push_back(p.xy());
    }
    return out;
}

}  // namespace

FrenetCoord frenet_project(const Lane& lane, Vec2 p) {
    return Polyline2(to_2d(lane.centerline)).project(p);
}

bool point_on_lane(const Lane& lane, Vec2 p) {
    return point_in_polygon(lane.polygon, p);
}

bool crosses_line(Vec2 seg_a, Vec2 seg_b, const LaneLine& line) {
    for (std::size_t i = 0; i + 1 < line.polyline.size(); ++i) {
        if (segments_intersect(seg_a, seg_b, line.polyline[i].xy(), line.polyline[i + 1].xy())) {
            return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// MapIndex
// ---------------------------------------------------------------------------

MapIndex::MapIndex(const MapFeatures& features, double cell_size) : cell_size_(cell_size) {
    for (const auto& [id, feature] : features) {
        if (const Lane* lane = std::get_if<Lane>(&feature)) {
            lanes_.push_back(*lane);
            lanes_.back().id = id;
        } else if (const LaneLine* line = std::get_if<LaneLine>(&feature)) {
            lines_.push_back(*line);
            lines_.back().id = id;
        }
    }
    centerlines_.reserve(lanes_.size());
    for (std::size_t i = 0; i < lanes_.size(); ++i) {
        lane_lookup_[lanes_[i].id] = i;
        centerlines_.emplace_back(to_2d(lanes_[i].centerline));
        register_lane(i);
    }
}

std::int64_t MapIndex::cell_key(int cx, int cy) const {
    return (static_cast<std::int64_t>(cx) << 32) ^ (static_cast<std::int64_t>(cy) & 0xffffffffLL);
}

void MapIndex::register_lane(std::size_t idx) {
    const Lane& lane = lanes_[idx];
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    auto grow = [&](Vec2 p) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    };
    for (const Vec2& p : lane.polygon) {
        grow(p);
    }
    for (const Vec3& p : lane.centerline) {
        grow(p.xy());
    }
    if (!std::isfinite(xmin)) {
        return;
    }
    int cx0 = static_cast<int>(std::floor(xmin / cell_size_));
    int cx1 = static_cast<int>(std::floor(xmax / cell_size_));
    int cy0 = static_cast<int>(std::floor(ymin / cell_size_));
    int cy1 = static_cast<int>(std::floor(ymax / cell_size_));
    for (int cx = cx0; cx <= cx1; ++cx) {
        for (int cy = cy0; cy <= cy1; ++cy) {
            grid_[cell_key(cx, cy)].push_back(idx);
        }
    }
}

const Lane& MapIndex::lane(const std::string& id) const {
    auto it = lane_lookup_.find(id);
    if (it == lane_lookup_.end()) {
        throw MapError("unknown lane id: " + id);
    }
    return lanes_[it->second];
}

const Polyline2& MapIndex::centerline(const std::string& id) const {
    auto it = lane_lookup_.find(id);
    if (it == lane_lookup_.end()) {
        throw MapError("unknown lane id: " + id);
    }
    return centerlines_[it->second];
}

const std::vector<std::string>& MapIndex::lane_successors(const std::string& id) const {
    return lane(id).exit_lanes;
}

std::vector<std::size_t> MapIndex::candidates_near(Vec2 p, int ring) const {
    std::vector<std::size_t> out;
    int cx = static_cast<int>(std::floor(p.x / cell_size_));
    int cy = static_cast<int>(std::floor(p.y / cell_size_));
    for (int dx = -ring; dx <= ring; ++dx) {
        for (int dy = -ring; dy <= ring; ++dy) {
            // only the new outer shell when expanding
            if (std::max(std::abs(dx), std::abs(dy)) != ring) {
                continue;
            }
            auto it = grid_.find(cell_key(cx + dx, cy + dy));
            if (it != grid_.end()) {
                out.insert(out.end(), it->second.begin(), it->second.end());
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string MapIndex::nearest_lane(Vec2 p) const {
    if (lanes_.empty()) {
        throw MapError("nearest_lane on empty map");
    }
    // |d| is the lateral offset, which grid distance does not bound, so the
    // argmin is taken over every lane
    std::size_t best_idx = 0;
    FrenetCoord best = centerlines_[0].project(p);
    for (std::size_t idx = 1; idx < lanes_.size(); ++idx) {
        FrenetCoord f = centerlines_[idx].project(p);
        double da = std::abs(f.d), db = std::abs(best.d);
        if (da < db ||
            (da == db && (f.s < best.s || (f.s == best.s && lanes_[idx].id < lanes_[best_idx].id)))) {
            best_idx = idx;
            best = f;
        }
    }
    return lanes_[best_idx].id;
}

bool MapIndex::in_drivable_area(Vec2 p) const {
    int cx = static_cast<int>(std::floor(p.x / cell_size_));
    int cy = static_cast<int>(std::floor(p.y / cell_size_));
    auto it = grid_.find(cell_key(cx, cy));
    if (it == grid_.end()) {
        return false;
    }
    for (std::size_t idx : it->second) {
        if (point_in_polygon(lanes_[idx].polygon, p)) {
            return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Feature validation
// ---------------------------------------------------------------------------

std::vector<LaneValidationIssue> validate_map_features(const MapFeatures& features) {
    std::vector<LaneValidationIssue> issues;
    auto known = [&](const std::string& id) { return features.count(id) > 0; };
    for (const auto& [id, feature] : features) {
        if (const Lane* lane = std::get_if<Lane>(&feature)) {
            if (lane->centerline.size() < 2) {
                issues.push_back({id, "lane centerline has fewer than 2 points"});
            }
            for (std::size_t i = 0; i + 1 < lane->centerline.size(); ++i) {
                if ((lane->centerline[i + 1].xy() - lane->centerline[i].xy()).norm2() == 0.0) {
                    issues.push_back({id, "lane centerline has zero-length segment"});
                    break;
                }
            }
            if (lane->polygon.size() < 3) {
                issues.push_back({id, "lane polygon has fewer than 3 points"});
            } else if (!polygon_is_simple(lane->polygon)) {
                issues.push_back({id, "lane polygon is not simple"});
            }
            for (const auto* group : {&lane->entry_lanes, &lane->exit_lanes,
                                      &lane->left_neighbors, &lane->right_neighbors}) {
                for (const std::string& ref : *group) {
                    if (!known(ref)) {
                        issues.push_back({id, "lane connectivity references unknown id: " + ref});
                    }
                }
            }
        } else if (const LaneLine* line = std::get_if<LaneLine>(&feature)) {
            if (line->polyline.size() < 2) {
                issues.push_back({id, "lane line polyline has fewer than 2 points"});
            }
        }
    }
    return issues;
}

}  // namespace scensim
