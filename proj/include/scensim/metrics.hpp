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

#include <span>
#include <string>
#include <vector>

#include "scensim/scenario.hpp"

namespace scensim {

enum class SimMode { Single, Multi };

enum class Termination { Running, Success, OutOfRoute, Timeout, OutOfRoad };

const char* termination_name(Termination t);

enum class CollisionClass { None, VehicleOrHuman, Object };

struct RewardConfig {
    SimMode mode = SimMode::Single;
    double c1 = 2.0;
    double c2 = 1.0;
    double c3 = 1.0;
    // penalty magnitudes; they enter the reward with negative sign
    double collision_vehicle_penalty = 2.0;
    double collision_object_penalty = 0.5;
    double success_reward = 10.0;
    double out_of_route_penalty = 5.0;

    static RewardConfig single_agent();
    static RewardConfig multi_agent();
};

/// Everything the reward of one step depends on.
struct TransitionSummary {
    double displacement = 0.0;  // longitudinal Frenet movement, s_t - s_{t-1}
    double speed = 0.0;         // m/s after the step
    double steer = 0.0;         // steering action in [-1, 1]
    CollisionClass collision = CollisionClass::None;
    Termination terminal = Termination::Running;
};

/// Longitudinal Frenet movement on the reference between two positions.
double displacement_reward(const Polyline2& reference, Vec2 pos_prev, Vec2 pos_now);

/// min(0, 1/v - |steer|); v = 0 counts as 1/v = +inf, hence 0.
double smooth_penalty(double v, double steer);

/// Single-agent: c1*disp + c2*smooth - c3*penalty + terminal.
/// Multi-agent: disp - penalty + terminal.
/// Displacement and smoothness are zeroed on the terminal step.
double step_reward(const RewardConfig& cfg, const TransitionSummary& t);

double terminal_reward(const RewardConfig& cfg, Termination t);
double collision_penalty(const RewardConfig& cfg, CollisionClass c);

/// max_t s(agent_t) / S_total on the ground-truth polyline, clipped to [0,1].
/// Monotone in episode time by construction. Throws on a gt shorter than 2 points.
double route_completion(std::span<const Vec2> agent_traj, const Polyline2& gt);

/// (1/T) sum over t < T of |agent_t - gt_t|, T = min of the two lengths.
double average_distance(std::span<const Vec2> agent_traj, std::span<const Vec2> gt_traj);

/// Distance between the two last positions.
double final_distance(std::span<const Vec2> agent_traj, std::span<const Vec2> gt_traj);

/// track_length x cumulative |heading change| over the valid frames.
/// Throws on fewer than 2 valid frames.
double difficulty_score(const ObjectTrack& gt_track);

struct EpisodeRecord {
    std::string scenario_id;
    std::string agent_id;
    Termination outcome = Termination::Running;
    double route_completion = 0.0;
    double mean_speed = 0.0;
    double total_reward = 0.0;
    int crashes = 0;  // cost
    int steps = 0;
};

struct MetricsSummary {
    std::size_t episodes = 0;
    double success_rate = 0.0;
    double out_of_road_rate = 0.0;
    double timeout_rate = 0.0;
    double mean_route_completion = 0.0;
    double mean_speed = 0.0;
    double mean_cost = 0.0;
    double mean_reward = 0.0;
};

MetricsSummary episode_metrics(std::span<const EpisodeRecord> batch);

}  // namespace scensim
