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

#include <json.hpp>

#include "scensim/scenario.hpp"

namespace scensim {

struct PgError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PGConfig {
    std::uint64_t seed = 0;
    int num_blocks = 2;
    // block kind weights, normalized before sampling
    double straight_weight = 0.4;
    double curve_weight = 0.4;
    double intersection_weight = 0.2;
    double traffic_density = 15.0;  // vehicles per 100 m of lane
    double duration_s = 20.0;
    double dt = 0.1;
    int lanes_per_road = 2;
    double construction_prob = 0.4;  // chance of a cone/barrier cluster
    double lane_width = 3.5;
    // block parameter ranges
    double straight_length_min = 120.0;
    double straight_length_max = 200.0;
    double curve_radius_min = 30.0;
    double curve_radius_max = 80.0;
    double curve_angle_min_deg = 30.0;
    double curve_angle_max_deg = 120.0;
    double arm_length = 40.0;
    double speed_limit_min = 10.0;  // m/s, sampled per scenario
    double speed_limit_max = 15.0;

    void validate() const;  // throws PgError on inconsistent settings
    static PGConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

/// One drivable route: the lane ids of one lateral position chained across
/// blocks, with the concatenated centerline.
struct PgChain {
    std::vector<std::string> lane_ids;
    Polyline2 centerline;
    int road = 0;           // 0 = main road, arms numbered from 1
    int lateral_index = 0;  // 0 = leftmost lane of its road
};

struct PgMap {
    MapFeatures features;
    std::vector<PgChain> chains;
    int intersection_blocks = 0;
    double speed_limit = 13.0;

    double total_lane_length() const;
    /// Chain index of the adjacent lane on the same road, if any.
    std::optional<std::size_t> adjacent_chain(std::size_t chain, int direction) const;
};

/// Deterministic in cfg.seed: blocks sampled from the weight table and
/// chained with continuous centerlines; lanes carry polyline, polygon and
/// connectivity; solid/road-edge lines at road borders, broken between lanes.
PgMap generate_map(const PGConfig& cfg);

struct SpawnedVehicle {
    std::size_t chain = 0;
    double s = 0.0;      // center position along the chain
    double speed = 0.0;  // equilibrium for the local gap
    double length = 4.5;
    double width = 1.8;
    double height = 1.5;
};

struct StaticObstacle {
    ObjectType type = ObjectType::Cone;
    std::size_t chain = 0;
    double s = 0.0;
    double length = 0.3;
    double width = 0.3;
    double height = 0.5;
};

struct TrafficPlan {
    std::vector<SpawnedVehicle> vehicles;
    std::vector<StaticObstacle> obstacles;
    int requested = 0;  // density * total lane length / 100, rounded
};

/// Scatters vehicles along the chains at roughly the configured density,
/// capped by non-overlapping placement, plus an optional construction
/// cluster; initial speeds are at IDM equilibrium for the local gap.
TrafficPlan spawn_traffic(const PgMap& map, const PGConfig& cfg);

/// Simulates duration/dt steps with every vehicle under IDM (including
/// lane changes away from leaders static for more than 3 s), records
/// object-centric tracks, designates the longest-route vehicle as the sdc,
/// and fills metadata (statistics and difficulty included).
ScenarioDescription roll_out(const PgMap& map, const TrafficPlan& plan, const PGConfig& cfg);

/// generate_map + spawn_traffic + roll_out.
ScenarioDescription generate_scenario(const PGConfig& cfg);

/// Scenario id for a seed, e.g. "pg_000042".
std::string pg_scenario_id(std::uint64_t seed);

}  // namespace scensim
