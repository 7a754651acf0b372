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
#include <set>
#include <string>
#include <vector>

#include "scensim/idm.hpp"
#include "scensim/metrics.hpp"

namespace scensim {

struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PolicyKind { Replay, Idm, EnvInput };

/// How logged traffic is bound in single-agent mode. Default follows the
/// closed-loop rule (vehicles behind the ego react via IDM, the rest
/// replays); the overrides force one policy for every traffic vehicle.
enum class TrafficMode { Default, AllReplay, AllIdm };

/// External control command; both entries clipped to [-1, 1] on ingestion.
struct AgentAction {
    double steer = 0.0;
    double accel = 0.0;

    AgentAction clipped() const;
};

struct VehicleParams {
    double wheelbase = 2.8;               // meters
    double max_steer = 40.0 * kPi / 180;  // radians
    double accel_scale = 2.5;             // m/s^2 at accel = +1
    double brake_scale = 5.0;             // m/s^2 at accel = -1
};

struct KinematicState {
    Vec2 pos;
    double heading = 0.0;
    double speed = 0.0;
};

/// Kinematic bicycle step; speed never goes below zero (no reverse).
KinematicState kinematic_step(const KinematicState& s, AgentAction action, double dt,
                              const VehicleParams& params = {});

struct EngineConfig {
    SimMode mode = SimMode::Single;
    IdmParams idm;
    VehicleParams vehicle;
    RewardConfig reward;  // defaulted from mode when left untouched
    double out_of_route_distance = 2.5;   // single-agent, meters
    double out_of_road_distance = 10.0;   // multi-agent, meters
    double destination_margin = 2.0;      // success within this of the reference end
    double success_route_completion = 0.95;  // multi-agent gate (strictly greater)
    int overtime_steps = 50;              // timeout at tick > N + overtime
    double idm_lookahead = 50.0;          // leader scan, meters of path
    double idm_corridor_margin = 1.0;     // extra corridor width, meters
    double lane_width = 3.5;              // "behind the ego" lateral gate
    std::uint64_t noise_seed = 0;
    // single-agent only: how the sdc itself is driven
    PolicyKind sdc_policy = PolicyKind::EnvInput;
    TrafficMode traffic_mode = TrafficMode::Default;

    static EngineConfig single_agent();
    static EngineConfig multi_agent();
};

/// Runtime state of one simulated entity.
struct ObjectState {
    std::string id;
    ObjectType type = ObjectType::Vehicle;
    PolicyKind policy = PolicyKind::Replay;
    bool alive = false;
    Vec2 pos;
    double heading = 0.0;
    Vec2 velocity;
    double speed = 0.0;
    double length = 0.0;
    double width = 0.0;
    double steering = 0.0;  // last steer action, EnvInput only
    // closed-loop traffic follows its recorded geometry at IDM speed
    Polyline2 path;
    double path_s = 0.0;
    double desired_speed = 0.0;
    int first_valid = -1;

    Obb footprint() const { return {pos, heading, length, width}; }
};

struct AgentStatus {
    Termination termination = Termination::Running;
    double ref_s = 0.0;
    double ref_d = 0.0;
    double max_ref_s = 0.0;
    double route_completion = 0.0;
    double total_reward = 0.0;
    double speed_sum = 0.0;
    int crashes = 0;
    int steps = 0;
    bool spawned = false;
};

struct AgentStepInfo {
    double reward = 0.0;
    Termination termination = Termination::Running;
    CollisionClass collision = CollisionClass::None;
    bool crashed = false;  // new contact this step
    double displacement = 0.0;
    double route_completion = 0.0;
    double speed = 0.0;
};

struct CollisionEvent {
    std::string a;
    std::string b;
};

CollisionClass collision_class_of(ObjectType counterpart);

struct LeaderHit {
    std::string leader_id;
    double gap = 0.0;
    double dv = 0.0;
};

/// One closed-loop world: replay synchronization, IDM traffic, kinematic
/// agents, collisions, terminations. Confined to one execution context;
/// run many worlds in parallel, never one world from two threads.
class World {
public:
    /// Builds and resets. Throws EngineError when the scenario fails
    /// validation or an agent action set is inconsistent later on.
    World(const ScenarioDescription& scenario, const MapIndex& map, EngineConfig cfg = {});

    /// Back to frame 0; identical to a freshly constructed world.
    void reset();

    /// Advances one dt. Requires an action for every live, non-terminal
    /// EnvInput agent; deterministic given (state, actions, noise seed).
    std::map<std::string, AgentStepInfo> step(const std::map<std::string, AgentAction>& actions);

    int tick() const { return tick_; }
    double time_s() const { return tick_ * scenario_->metadata.dt; }
    int horizon() const { return horizon_; }
    double dt() const { return scenario_->metadata.dt; }

    /// All tracked agents terminal; with no tracked agents, end of recording.
    bool done() const;

    const ScenarioDescription& scenario() const { return *scenario_; }
    const MapIndex& map() const { return *map_; }
    const EngineConfig& config() const { return cfg_; }

    const std::vector<ObjectState>& objects() const { return objects_; }
    const ObjectState* find_object(const std::string& id) const;
    const std::map<std::string, AgentStatus>& agents() const { return agents_; }
    const Polyline2& reference(const std::string& agent_id) const;

    /// Nearest object intersecting the forthcoming path corridor.
    std::optional<LeaderHit> leader_lookup(const std::string& object_id) const;

    /// Pairwise oriented-rectangle contacts among live objects.
    std::vector<CollisionEvent> detect_collisions() const;

    /// Light state governing the object's current lane (or its immediate
    /// successor); nullopt when no light applies.
    std::optional<LightState> light_for_object(const std::string& object_id) const;

    Termination check_termination(const std::string& agent_id) const;

    DetRng& noise_rng() { return noise_rng_; }

private:
    const ScenarioDescription* scenario_;
    const MapIndex* map_;
    EngineConfig cfg_;
    int tick_ = 0;
    int horizon_ = 0;
    std::vector<ObjectState> objects_;
    std::map<std::string, std::size_t> slot_of_;
    std::map<std::string, AgentStatus> agents_;
    std::map<std::string, Polyline2> references_;
    std::set<std::pair<std::string, std::string>> contacts_;  // previous step
    DetRng noise_rng_{0};

    void spawn_or_sync(int frame);
    void assign_policies();
    double desired_speed_for(const ObjectState& obj) const;
    Termination evaluate_termination(const std::string& agent_id, const AgentStatus& st) const;
};

}  // namespace scensim
