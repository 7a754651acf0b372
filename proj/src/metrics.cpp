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
#include "scensim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scensim {

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::Running: return "running";
        case Termination::Success: return "success";
        case Termination::OutOfRoute: return "out_of_route";
        case Termination::Timeout: return "timeout";
        case Termination::OutOfRoad: return "out_of_road";
    }
    return "running";
}

RewardConfig RewardConfig::single_agent() {
    return RewardConfig{};
}

RewardConfig RewardConfig::multi_agent() {
    RewardConfig cfg;
    cfg.mode = SimMode::Multi;
    cfg.collision_vehicle_penalty = 1.0;
    cfg.collision_object_penalty = 0.0;
    cfg.out_of_route_penalty = 1.0;
    return cfg;
}

double displacement_reward(const Polyline2& reference, Vec2 pos_prev, Vec2 pos_now) {
    return reference.project(pos_now).s - reference.project(pos_prev).s;
}

double smooth_penalty(double v, double steer) {
    if (v <= 0.0) {
        return 0.0;
    }
    return std::min(0.0, 1.0 / v - std::abs(steer));
}

double collision_penalty(const RewardConfig& cfg, CollisionClass c) {
    switch (c) {
        case CollisionClass::None: return 0.0;
        case CollisionClass::VehicleOrHuman: return cfg.collision_vehicle_penalty;
        case CollisionClass::Object: return cfg.collision_object_penalty;
    }
    return 0.0;
}

double terminal_reward(const RewardConfig& cfg, Termination t) {
    switch (t) {
        case Termination::Success:
            return cfg.success_reward;
        case Termination::OutOfRoute:
        case Termination::OutOfRoad:
            return -cfg.out_of_route_penalty;
        case Termination::Running:
        case Termination::Timeout:
            return 0.0;
    }
    return 0.0;
}

double step_reward(const RewardConfig& cfg, const TransitionSummary& t) {
    const bool terminal = t.terminal != Termination::Running;
    const double disp = terminal ? 0.0 : t.displacement;
    const double penalty = collision_penalty(cfg, t.collision);
    const double r_term = terminal_reward(cfg, t.terminal);
    if (cfg.mode == SimMode::Multi) {
        return disp - penalty + r_term;
    }
    const double smooth = terminal ? 0.0 : smooth_penalty(t.speed, t.steer);
    return cfg.c1 * disp + cfg.c2 * smooth - cfg.c3 * penalty + r_term;
}

double route_completion(std::span<const Vec2> agent_traj, const Polyline2& gt) {
    if (gt.size() < 2) {
        throw std::invalid_argument("route_completion: ground truth shorter than 2 points");
    }
    double best_s = 0.0;
    for (Vec2 p : agent_traj) {
        best_s = std::max(best_s, gt.project(p).s);
    }
    return std::clamp(best_s / gt.length(), 0.0, 1.0);
}

double average_distance(std::span<const Vec2> agent_traj, std::span<const Vec2> gt_traj) {
    if (agent_traj.empty() || gt_traj.empty()) {
        throw std::invalid_argument("average_distance: empty trajectory");
    }
    const std::size_t t_max = std::min(agent_traj.size(), gt_traj.size());
    double total = 0.0;
    for (std::size_t t = 0; t < t_max; ++t) {
        total += (agent_traj[t] - gt_traj[t]).norm();
    }
    return total / static_cast<double>(t_max);
}

double final_distance(std::span<const Vec2> agent_traj, std::span<const Vec2> gt_traj) {
    if (agent_traj.empty() || gt_traj.empty()) {
        throw std::invalid_argument("final_distance: empty trajectory");
    }
    return (agent_traj.back() - gt_traj.back()).norm();
}

double difficulty_score(const ObjectTrack& gt_track) {
    double length = 0.0;
    double curvature = 0.0;
    bool have_prev = false;
    Vec2 prev_pos;
    double prev_heading = 0.0;
    int valid_frames = 0;
    for (std::size_t i = 0; i < gt_track.position.size(); ++i) {
        if (i < gt_track.valid.size() && !gt_track.valid[i]) {
            continue;
        }
        ++valid_frames;
        Vec2 p = gt_track.position[i].xy();
        double h = i < gt_track.heading.size() ? gt_track.heading[i] : 0.0;
        if (have_prev) {
            length += (p - prev_pos).norm();
            curvature += std::abs(angle_diff(prev_heading, h));
        }
        prev_pos = p;
        prev_heading = h;
        have_prev = true;
    }
    if (valid_frames < 2) {
        throw std::invalid_argument("difficulty_score: fewer than 2 valid frames");
    }
    return length * curvature;
}

MetricsSummary episode_metrics(std::span<const EpisodeRecord> batch) {
    if (batch.empty()) {
        throw std::invalid_argument("episode_metrics: empty batch");
    }
    MetricsSummary s;
    s.episodes = batch.size();
    for (const EpisodeRecord& e : batch) {
        switch (e.outcome) {
            case Termination::Success: s.success_rate += 1.0; break;
            case Termination::OutOfRoute:
            case Termination::OutOfRoad: s.out_of_road_rate += 1.0; break;
            case Termination::Timeout: s.timeout_rate += 1.0; break;
            case Termination::Running: break;
        }
        s.mean_route_completion += e.route_completion;
        s.mean_speed += e.mean_speed;
        s.mean_cost += e.crashes;
        s.mean_reward += e.total_reward;
    }
    const double n = static_cast<double>(batch.size());
    s.success_rate /= n;
    s.out_of_road_rate /= n;
    s.timeout_rate /= n;
    s.mean_route_completion /= n;
    s.mean_speed /= n;
    s.mean_cost /= n;
    s.mean_reward /= n;
    return s;
}

}  // namespace scensim
