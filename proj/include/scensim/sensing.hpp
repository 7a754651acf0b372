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

#include "scensim/engine.hpp"

namespace scensim {

struct SensingConfig {
    int lidar_rays = 120;
    double lidar_max_dist = 50.0;
    double lidar_noise_std = 0.01;  // normalized units; 0 disables the draw
    int nav_points = 10;
    double nav_spacing = 2.0;   // meters between consecutive points
    double nav_norm = 50.0;     // meters mapped to 1.0
    double speed_norm = 80.0 / 3.6;  // 80 km/h mapped to 1.0
    double lateral_norm = 2.5;  // meters mapped to 1.0
    bool boundary_enabled = false;
    int boundary_rays = 12;
    double boundary_max_dist = 50.0;
};

struct ObservationField {
    std::string name;
    std::size_t offset = 0;
    std::size_t width = 0;
};

struct ObservationLayout {
    std::vector<ObservationField> fields;
    std::size_t total = 0;
};

/// Field offsets and widths of the assembled observation vector, so external
/// clients can parse it without shared code.
ObservationLayout observation_layout(const SensingConfig& cfg);

/// Rays uniformly spaced over 360 degrees starting at the agent heading;
/// each value is hit distance / max_dist against other objects' footprints,
/// 1.0 when nothing is hit. Gaussian noise (std > 0) comes from `noise`
/// and the result is clipped back into [0, 1].
std::vector<double> lidar_scan(const World& world, const std::string& agent_id,
                               const SensingConfig& cfg, DetRng* noise);

/// (steering, heading error to the reference tangent / pi, speed normalized,
/// signed lateral offset normalized), all clipped to [-1, 1].
std::vector<double> ego_state(const World& world, const std::string& agent_id,
                              const SensingConfig& cfg);

/// Points on the reference at s + k*spacing (clamped past the end),
/// rotated into the agent frame, normalized by nav_norm, clipped to [-1, 1].
std::vector<double> navigation_points(const Polyline2& reference, Vec2 agent_pos,
                                      double agent_heading, const SensingConfig& cfg);

/// Like lidar_scan but against lane lines of type solid or road_edge.
std::vector<double> boundary_scan(const World& world, const std::string& agent_id,
                                  const SensingConfig& cfg);

/// Assembled per-agent observation (lidar | ego state | navigation
/// [| boundary]); layout given by observation_layout. Draws lidar noise
/// from the world's episode rng.
std::vector<double> observe(World& world, const std::string& agent_id, const SensingConfig& cfg);

}  // namespace scensim
