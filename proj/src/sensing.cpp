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
#include "scensim/sensing.hpp"

#include <algorithm>
#include <cmath>

namespace scensim {

ObservationLayout observation_layout(const SensingConfig& cfg) {
    ObservationLayout layout;
    auto push = [&](const std::string& name, std::size_t width) {
        layout.fields.push_back({name, layout.total, width});
        layout.total += width;
    };
    push("lidar", static_cast<std::size_t>(cfg.lidar_rays));
    push("ego_state", 4);
    push("navigation", static_cast<std::size_t>(cfg.nav_points) * 2);
    if (cfg.boundary_enabled) {
        push("boundary", static_cast<std::size_t>(cfg.boundary_rays));
    }
    return layout;
}

namespace {

const ObjectState& agent_object(const World& world, const std::string& agent_id) {
    const ObjectState* obj = world.find_object(agent_id);
    if (obj == nullptr) {
        throw EngineError("unknown agent id: " + agent_id);
    }
    return *obj;
}

}  // namespace

std::vector<double> lidar_scan(const World& world, const std::string& agent_id,
                               const SensingConfig& cfg, DetRng* noise) {
    const ObjectState& self = agent_object(world, agent_id);
    std::vector<double> out(static_cast<std::size_t>(cfg.lidar_rays), 1.0);

    // cheap reject radius per object
    std::vector<const ObjectState*> nearby;
    for (const ObjectState& obj : world.objects()) {
        if (&obj == &self || !obj.alive) {
            continue;
        }
        double circum = 0.5 * std::hypot(obj.length, obj.width);
        if ((obj.pos - self.pos).norm() - circum <= cfg.lidar_max_dist) {
            nearby.push_back(&obj);
        }
    }

    for (int ray = 0; ray < cfg.lidar_rays; ++ray) {
        double angle = self.heading + 2.0 * kPi * ray / cfg.lidar_rays;
        Vec2 dir{std::cos(angle), std::sin(angle)};
        double best = cfg.lidar_max_dist;
        for (const ObjectState* obj : nearby) {
            auto hit = ray_obb_hit(self.pos, dir, obj->footprint(), best);
            if (hit) {
                best = std::min(best, *hit);
            }
        }
        out[static_cast<std::size_t>(ray)] = best / cfg.lidar_max_dist;
    }
    if (noise != nullptr && cfg.lidar_noise_std > 0.0) {
        for (double& v : out) {
            v = std::clamp(v + noise->next_gaussian() * cfg.lidar_noise_std, 0.0, 1.0);
        }
    }
    return out;
}

std::vector<double> ego_state(const World& world, const std::string& agent_id,
                              const SensingConfig& cfg) {
    const ObjectState& self = agent_object(world, agent_id);
    const Polyline2& ref = world.reference(agent_id);
    FrenetCoord f = ref.project(self.pos);
    double ref_heading = ref.heading_at(f.s);
    double heading_err = angle_diff(ref_heading, self.heading);
    return {
        std::clamp(self.steering, -1.0, 1.0),
        std::clamp(heading_err / kPi, -1.0, 1.0),
        std::clamp(self.speed / cfg.speed_norm, 0.0, 1.0),
        std::clamp(f.d / cfg.lateral_norm, -1.0, 1.0),
    };
}

std::vector<double> navigation_points(const Polyline2& reference, Vec2 agent_pos,
                                      double agent_heading, const SensingConfig& cfg) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(cfg.nav_points) * 2);
    double s0 = reference.project(agent_pos).s;
    for (int k = 1; k <= cfg.nav_points; ++k) {
        double s = std::min(s0 + k * cfg.nav_spacing, reference.length());
        Vec2 p = reference.point_at(s);
        Vec2 local = (p - agent_pos).rotated(-agent_heading);
        out.push_back(std::clamp(local.x / cfg.nav_norm, -1.0, 1.0));
        out.push_back(std::clamp(local.y / cfg.nav_norm, -1.0, 1.0));
    }
    return out;
}

std::vector<double> boundary_scan(const World& world, const std::string& agent_id,
                                  const SensingConfig& cfg) {
    const ObjectState& self = agent_object(world, agent_id);
    std::vector<double> out(static_cast<std::size_t>(cfg.boundary_rays), 1.0);
    for (int ray = 0; ray < cfg.boundary_rays; ++ray) {
        double angle = self.heading + 2.0 * kPi * ray / cfg.boundary_rays;
        Vec2 dir{std::cos(angle), std::sin(angle)};
        double best = cfg.boundary_max_dist;
        for (const LaneLine& line : world.map().lane_lines()) {
            if (line.type == LineType::Broken) {
                continue;
            }
            for (std::size_t i = 0; i + 1 < line.polyline.size(); ++i) {
                auto hit = ray_segment_hit(self.pos, dir, line.polyline[i].xy(),
                                           line.polyline[i + 1].xy(), best);
                if (hit) {
                    best = std::min(best, *hit);
                }
            }
        }
        out[static_cast<std::size_t>(ray)] = best / cfg.boundary_max_dist;
    }
    return out;
}

std::vector<double> observe(World& world, const std::string& agent_id, const SensingConfig& cfg) {
    const ObjectState& self = agent_object(world, agent_id);
    std::vector<double> out = lidar_scan(world, agent_id, cfg, &world.noise_rng());
    std::vector<double> ego = ego_state(world, agent_id, cfg);
    out.insert(out.end(), ego.begin(), ego.end());
    std::vector<double> nav =
        navigation_points(world.reference(agent_id), self.pos, self.heading, cfg);
    out.insert(out.end(), nav.begin(), nav.end());
    if (cfg.boundary_enabled) {
        std::vector<double> boundary = boundary_scan(world, agent_id, cfg);
        out.insert(out.end(), boundary.begin(), boundary.end());
    }
    return out;
}

}  // namespace scensim
