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
#include "scensim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scensim {

namespace {
// below this a recorded path is degenerate and the object stays put
constexpr double kMinPathLength = 0.5;
}

AgentAction AgentAction::clipped() const {
    return {std::clamp(steer, -1.0, 1.0), std::clamp(accel, -1.0, 1.0)};
}

EngineConfig EngineConfig::single_agent() {
    EngineConfig cfg;
    cfg.mode = SimMode::Single;
    cfg.reward = RewardConfig::single_agent();
    return cfg;
}

EngineConfig EngineConfig::multi_agent() {
    EngineConfig cfg;
    cfg.mode = SimMode::Multi;
    cfg.reward = RewardConfig::multi_agent();
    return cfg;
}

KinematicState kinematic_step(const KinematicState& s, AgentAction action, double dt,
                              const VehicleParams& params) {
    AgentAction a = action.clipped();
    double steer_angle = a.steer * params.max_steer;
    double accel = a.accel >= 0.0 ? a.accel * params.accel_scale : a.accel * params.brake_scale;
    KinematicState out;
    out.speed = std::max(0.0, s.speed + accel * dt);
    out.pos = s.pos + Vec2{std::cos(s.heading), std::sin(s.heading)} * (out.speed * dt);
    out.heading = wrap_angle(s.heading + out.speed * std::tan(steer_angle) / params.wheelbase * dt);
    return out;
}

CollisionClass collision_class_of(ObjectType counterpart) {
    switch (counterpart) {
        case ObjectType::Vehicle:
        case ObjectType::Pedestrian:
        case ObjectType::Cyclist:
            return CollisionClass::VehicleOrHuman;
        case ObjectType::Cone:
        case ObjectType::Barrier:
            return CollisionClass::Object;
    }
    return CollisionClass::None;
}

// ---------------------------------------------------------------------------
// World
// ---------------------------------------------------------------------------

World::World(const ScenarioDescription& scenario, const MapIndex& map, EngineConfig cfg)
    : scenario_(&scenario), map_(&map), cfg_(cfg) {
    ValidationReport report = validate_scenario(scenario);
    if (!report.pass) {
        throw EngineError("scenario fails validation: " + report.to_string());
    }
    if (cfg_.mode != cfg_.reward.mode) {
        throw EngineError("engine mode and reward mode disagree");
    }
    horizon_ = scenario.metadata.episode_length;
    reset();
}

void World::reset() {
    tick_ = 0;
    objects_.clear();
    slot_of_.clear();
    agents_.clear();
    references_.clear();
    contacts_.clear();
    noise_rng_ = DetRng(cfg_.noise_seed);

    for (const auto& [id, track] : scenario_->tracks) {
        ObjectState obj;
        obj.id = id;
        obj.type = track.type;
        obj.length = track.length;
        obj.width = track.width;
        obj.first_valid = track.first_valid_frame();
        if (obj.first_valid >= 0) {
            obj.pos = track.position[obj.first_valid].xy();
            obj.heading = track.heading[obj.first_valid];
            obj.velocity = track.velocity[obj.first_valid];
            obj.speed = obj.velocity.norm();
        }
        slot_of_[id] = objects_.size();
        objects_.push_back(std::move(obj));
    }

    assign_policies();

    // references: the recorded valid positions of each controlled agent
    for (const auto& [id, status] : agents_) {
        const ObjectTrack& track = scenario_->tracks.at(id);
        std::vector<Vec2> pts;
        for (std::size_t i = 0; i < track.position.size(); ++i) {
            if (track.valid[i]) {
                pts.push_back(track.position[i].xy());
            }
        }
        references_.emplace(id, Polyline2(std::move(pts)));
    }

    spawn_or_sync(0);

    for (auto& [id, status] : agents_) {
        const ObjectState& obj = objects_[slot_of_.at(id)];
        if (obj.alive) {
            const Polyline2& ref = references_.at(id);
            FrenetCoord f = ref.project(obj.pos);
            status.spawned = true;
            status.ref_s = f.s;
            status.ref_d = f.d;
            status.max_ref_s = f.s;
            status.route_completion =
                ref.length() > 0.0 ? std::clamp(f.s / ref.length(), 0.0, 1.0) : 1.0;
        }
    }
}

void World::assign_policies() {
    const std::string& sdc_id = scenario_->metadata.sdc_id;
    const ObjectTrack& sdc = scenario_->tracks.at(sdc_id);
    if (sdc.first_valid_frame() < 0) {
        throw EngineError("sdc track has no valid frame");
    }

    auto bind_idm = [&](ObjectState& obj) {
        obj.policy = PolicyKind::Idm;
        const ObjectTrack& track = scenario_->tracks.at(obj.id);
        std::vector<Vec2> pts;
        for (std::size_t i = 0; i < track.position.size(); ++i) {
            if (track.valid[i]) {
                pts.push_back(track.position[i].xy());
            }
        }
        obj.path = Polyline2(std::move(pts));
        obj.path_s = 0.0;
        obj.desired_speed = desired_speed_for(obj);
    };

    if (cfg_.mode == SimMode::Single) {
        // the ego reference, for the behind-the-ego test
        std::vector<Vec2> ego_pts;
        for (std::size_t i = 0; i < sdc.position.size(); ++i) {
            if (sdc.valid[i]) {
                ego_pts.push_back(sdc.position[i].xy());
            }
        }
        Polyline2 ego_ref(std::move(ego_pts));
        double ego_s0 = ego_ref.project(sdc.position[sdc.first_valid_frame()].xy()).s;

        for (ObjectState& obj : objects_) {
            if (obj.id == sdc_id) {
                if (cfg_.sdc_policy == PolicyKind::Idm) {
                    bind_idm(obj);
                } else {
                    obj.policy = cfg_.sdc_policy;
                }
                continue;
            }
            obj.policy = PolicyKind::Replay;
            if (obj.type != ObjectType::Vehicle || obj.first_valid < 0 ||
                cfg_.traffic_mode == TrafficMode::AllReplay) {
                continue;
            }
            if (cfg_.traffic_mode == TrafficMode::AllIdm) {
                bind_idm(obj);
                continue;
            }
            FrenetCoord f = ego_ref.project(obj.pos);
            bool behind = f.s < ego_s0;
            if (!behind && f.s <= ego_s0 + 1e-9) {
                // clamped at the reference start counts as behind too
                Vec2 t0 = ego_ref.tangent_at(f.s);
                behind = t0.dot(obj.pos - ego_ref.point_at(f.s)) < 0.0;
            }
            if (behind && std::abs(f.d) < cfg_.lane_width) {
                bind_idm(obj);
            }
        }
        agents_.emplace(sdc_id, AgentStatus{});
    } else {
        for (ObjectState& obj : objects_) {
            if (obj.type == ObjectType::Vehicle && obj.first_valid >= 0) {
                obj.policy = PolicyKind::EnvInput;
                agents_.emplace(obj.id, AgentStatus{});
            } else {
                obj.policy = PolicyKind::Replay;
            }
        }
    }
}

double World::desired_speed_for(const ObjectState& obj) const {
    if (!map_->empty()) {
        try {
            const Lane& lane = map_->lane(map_->nearest_lane(obj.pos));
            if (lane.speed_limit) {
                return *lane.speed_limit;
            }
        } catch (const MapError&) {
        }
    }
    const ObjectTrack& track = scenario_->tracks.at(obj.id);
    double vmax = 0.0;
    for (std::size_t i = 0; i < track.velocity.size(); ++i) {
        if (track.valid[i]) {
            vmax = std::max(vmax, track.velocity[i].norm());
        }
    }
    return vmax;
}

void World::spawn_or_sync(int frame) {
    for (ObjectState& obj : objects_) {
        const ObjectTrack& track = scenario_->tracks.at(obj.id);
        const bool recorded =
            frame < static_cast<int>(track.valid.size()) && frame >= 0 && track.valid[frame];
        switch (obj.policy) {
            case PolicyKind::Replay:
                obj.alive = recorded;
                if (recorded) {
                    obj.pos = track.position[frame].xy();
                    obj.heading = track.heading[frame];
                    obj.velocity = track.velocity[frame];
                    obj.speed = obj.velocity.norm();
                }
                break;
            case PolicyKind::Idm:
                if (!obj.alive && frame == obj.first_valid) {
                    obj.alive = true;
                    obj.pos = track.position[frame].xy();
                    obj.heading = track.heading[frame];
                    obj.velocity = track.velocity[frame];
                    obj.speed = obj.velocity.norm();
                }
                break;
            case PolicyKind::EnvInput:
                if (!obj.alive && frame == obj.first_valid) {
                    obj.alive = true;
                    obj.pos = track.position[frame].xy();
                    obj.heading = track.heading[frame];
                    obj.velocity = track.velocity[frame];
                    obj.speed = obj.velocity.norm();
                    auto it = agents_.find(obj.id);
                    if (it != agents_.end() && !it->second.spawned) {
                        const Polyline2& ref = references_.at(obj.id);
                        FrenetCoord f = ref.project(obj.pos);
                        it->second.spawned = true;
                        it->second.ref_s = f.s;
                        it->second.ref_d = f.d;
                        it->second.max_ref_s = f.s;
                    }
                }
                break;
        }
    }
}

const ObjectState* World::find_object(const std::string& id) const {
    auto it = slot_of_.find(id);
    return it == slot_of_.end() ? nullptr : &objects_[it->second];
}

const Polyline2& World::reference(const std::string& agent_id) const {
    auto it = references_.find(agent_id);
    if (it == references_.end()) {
        throw EngineError("no reference for agent: " + agent_id);
    }
    return it->second;
}

bool World::done() const {
    if (agents_.empty()) {
        return tick_ >= horizon_ - 1;
    }
    for (const auto& [id, status] : agents_) {
        if (status.termination == Termination::Running) {
            return false;
        }
    }
    return true;
}

std::optional<LeaderHit> World::leader_lookup(const std::string& object_id) const {
    auto it = slot_of_.find(object_id);
    if (it == slot_of_.end()) {
        throw EngineError("unknown object id: " + object_id);
    }
    const ObjectState& self = objects_[it->second];
    if (!self.alive || self.path.length() < kMinPathLength) {
        return std::nullopt;
    }
    double self_s = self.policy == PolicyKind::Idm ? self.path_s : self.path.project(self.pos).s;
    const double reach = cfg_.idm_lookahead + self.length;
    std::optional<LeaderHit> best;
    double best_sgap = std::numeric_limits<double>::infinity();
    for (const ObjectState& other : objects_) {
        if (&other == &self || !other.alive) {
            continue;
        }
        if ((other.pos - self.pos).norm() > reach + other.length) {
            continue;
        }
        FrenetCoord f = self.path.project_window(other.pos, self_s - self.length,
                                                 self_s + cfg_.idm_lookahead + other.length);
        double s_gap = f.s - self_s;
        if (s_gap <= 0.0 || s_gap > cfg_.idm_lookahead) {
            continue;
        }
        double corridor = 0.5 * (self.width + cfg_.idm_corridor_margin) + 0.5 * other.width;
        if (std::abs(f.d) > corridor) {
            continue;
        }
        if (s_gap < best_sgap) {
            best_sgap = s_gap;
            double gap = std::max(s_gap - 0.5 * (self.length + other.length), 0.01);
            Vec2 tangent = self.path.tangent_at(f.s);
            double dv = self.speed - other.velocity.dot(tangent);
            best = LeaderHit{other.id, gap, dv};
        }
    }
    return best;
}

std::vector<CollisionEvent> World::detect_collisions() const {
    std::vector<CollisionEvent> events;
    for (std::size_t i = 0; i < objects_.size(); ++i) {
        const ObjectState& a = objects_[i];
        if (!a.alive) {
            continue;
        }
        double ra = 0.5 * std::hypot(a.length, a.width);
        for (std::size_t j = i + 1; j < objects_.size(); ++j) {
            const ObjectState& b = objects_[j];
            if (!b.alive) {
                continue;
            }
            double rb = 0.5 * std::hypot(b.length, b.width);
            if ((a.pos - b.pos).norm() > ra + rb) {
                continue;
            }
            if (obb_overlap(a.footprint(), b.footprint())) {
                events.push_back({a.id, b.id});
            }
        }
    }
    return events;
}

std::optional<LightState> World::light_for_object(const std::string& object_id) const {
    const ObjectState* obj = find_object(object_id);
    if (obj == nullptr) {
        throw EngineError("unknown object id: " + object_id);
    }
    if (map_->empty() || scenario_->dynamic_states.empty()) {
        return std::nullopt;
    }
    std::string lane_id;
    try {
        lane_id = map_->nearest_lane(obj->pos);
    } catch (const MapError&) {
        return std::nullopt;
    }
    const int frame = std::clamp(tick_, 0, horizon_ - 1);
    auto state_on = [&](const std::string& id) -> std::optional<LightState> {
        for (const auto& [light_id, light] : scenario_->dynamic_states) {
            if (light.lane_id == id && frame < static_cast<int>(light.states.size())) {
                return light.states[frame];
            }
        }
        return std::nullopt;
    };
    if (auto s = state_on(lane_id)) {
        return s;
    }
    for (const std::string& next : map_->lane_successors(lane_id)) {
        if (auto s = state_on(next)) {
            return s;
        }
    }
    return std::nullopt;
}

Termination World::evaluate_termination(const std::string& agent_id, const AgentStatus& st) const {
    const Polyline2& ref = references_.at(agent_id);
    if (cfg_.mode == SimMode::Single) {
        const double total = ref.length();
        if (st.ref_s >= total - cfg_.destination_margin &&
            std::abs(st.ref_d) <= cfg_.out_of_route_distance) {
            return Termination::Success;
        }
        if (std::abs(st.ref_d) > cfg_.out_of_route_distance) {
            return Termination::OutOfRoute;
        }
    } else {
        if (st.route_completion > cfg_.success_route_completion) {
            return Termination::Success;
        }
        if (std::abs(st.ref_d) > cfg_.out_of_road_distance) {
            return Termination::OutOfRoad;
        }
    }
    if (tick_ > horizon_ + cfg_.overtime_steps) {
        return Termination::Timeout;
    }
    return Termination::Running;
}

Termination World::check_termination(const std::string& agent_id) const {
    auto it = agents_.find(agent_id);
    if (it == agents_.end()) {
        throw EngineError("unknown agent id: " + agent_id);
    }
    if (it->second.termination != Termination::Running) {
        return it->second.termination;  // absorbing
    }
    if (!it->second.spawned) {
        return Termination::Running;
    }
    return evaluate_termination(agent_id, it->second);
}

std::map<std::string, AgentStepInfo> World::step(const std::map<std::string, AgentAction>& actions) {
    // live driven agents must be acted on, dead or foreign ones must not
    for (const auto& [id, action] : actions) {
        auto it = agents_.find(id);
        if (it == agents_.end() || objects_[slot_of_.at(id)].policy != PolicyKind::EnvInput) {
            throw EngineError("action for unknown agent: " + id);
        }
        const ObjectState& obj = objects_[slot_of_.at(id)];
        if (!obj.alive || it->second.termination != Termination::Running) {
            throw EngineError("action for dead agent: " + id);
        }
    }
    std::vector<std::string> live;
    for (const auto& [id, status] : agents_) {
        const ObjectState& obj = objects_[slot_of_.at(id)];
        if (status.spawned && status.termination == Termination::Running && obj.alive) {
            live.push_back(id);
            if (obj.policy == PolicyKind::EnvInput && actions.find(id) == actions.end()) {
                throw EngineError("missing action for agent: " + id);
            }
        }
    }

    const double dt = scenario_->metadata.dt;
    const int next = tick_ + 1;

    // 1. replay synchronization and late spawns
    spawn_or_sync(next);

    // 2. closed-loop traffic: accelerations from the pre-move snapshot
    std::vector<std::pair<std::size_t, double>> idm_accels;
    for (std::size_t i = 0; i < objects_.size(); ++i) {
        ObjectState& obj = objects_[i];
        if (obj.policy != PolicyKind::Idm || !obj.alive) {
            continue;
        }
        if (obj.path.length() < kMinPathLength) {
            obj.speed = 0.0;
            obj.velocity = {0.0, 0.0};
            continue;
        }
        std::optional<LeaderInfo> leader;
        if (auto hit = leader_lookup(obj.id)) {
            leader = LeaderInfo{hit->gap, hit->dv};
        }
        idm_accels.emplace_back(i, idm_acceleration(cfg_.idm, obj.speed, obj.desired_speed, leader));
    }
    for (auto [i, accel] : idm_accels) {
        ObjectState& obj = objects_[i];
        obj.speed = std::max(0.0, obj.speed + accel * dt);
        obj.path_s += obj.speed * dt;
        if (obj.path_s >= obj.path.length()) {
            obj.alive = false;  // drove off the end of its recorded route
            continue;
        }
        obj.pos = obj.path.point_at(obj.path_s);
        obj.heading = obj.path.heading_at(obj.path_s);
        obj.velocity = obj.path.tangent_at(obj.path_s) * obj.speed;
    }

    // 3. externally controlled agents
    for (const std::string& id : live) {
        ObjectState& obj = objects_[slot_of_.at(id)];
        if (obj.policy != PolicyKind::EnvInput) {
            continue;
        }
        AgentAction action = actions.at(id).clipped();
        KinematicState ks{obj.pos, obj.heading, obj.speed};
        KinematicState out = kinematic_step(ks, action, dt, cfg_.vehicle);
        obj.pos = out.pos;
        obj.heading = out.heading;
        obj.speed = out.speed;
        obj.velocity = Vec2{std::cos(out.heading), std::sin(out.heading)} * out.speed;
        obj.steering = action.steer;
    }

    // 4. contacts
    std::vector<CollisionEvent> collisions = detect_collisions();
    std::set<std::pair<std::string, std::string>> contacts_now;
    for (const CollisionEvent& e : collisions) {
        contacts_now.insert({e.a, e.b});
    }

    tick_ = next;

    // 5. agent bookkeeping, terminations, rewards
    std::map<std::string, AgentStepInfo> infos;
    for (const std::string& id : live) {
        AgentStatus& st = agents_.at(id);
        ObjectState& obj = objects_[slot_of_.at(id)];
        const Polyline2& ref = references_.at(id);

        FrenetCoord f = ref.project(obj.pos);
        double displacement = f.s - st.ref_s;
        st.ref_s = f.s;
        st.ref_d = f.d;
        st.max_ref_s = std::max(st.max_ref_s, f.s);
        st.route_completion =
            ref.length() > 0.0 ? std::clamp(st.max_ref_s / ref.length(), 0.0, 1.0) : 1.0;

        CollisionClass worst = CollisionClass::None;
        bool onset = false;
        for (const CollisionEvent& e : collisions) {
            const std::string* other = nullptr;
            if (e.a == id) {
                other = &e.b;
            } else if (e.b == id) {
                other = &e.a;
            } else {
                continue;
            }
            CollisionClass cls = collision_class_of(objects_[slot_of_.at(*other)].type);
            if (cls == CollisionClass::VehicleOrHuman || worst == CollisionClass::None) {
                worst = cls;
            }
            if (!contacts_.count({e.a, e.b})) {
                onset = true;
            }
        }
        if (onset) {
            ++st.crashes;
        }

        Termination term = evaluate_termination(id, st);
        st.termination = term;

        TransitionSummary transition;
        transition.displacement = displacement;
        transition.speed = obj.speed;
        transition.steer = obj.steering;
        transition.collision = worst;
        transition.terminal = term;
        double reward = step_reward(cfg_.reward, transition);
        st.total_reward += reward;
        st.speed_sum += obj.speed;
        st.steps += 1;

        AgentStepInfo info;
        info.reward = reward;
        info.termination = term;
        info.collision = worst;
        info.crashed = onset;
        info.displacement = displacement;
        info.route_completion = st.route_completion;
        info.speed = obj.speed;
        infos.emplace(id, info);

        if (term != Termination::Running && cfg_.mode == SimMode::Multi) {
            obj.alive = false;  // terminated agents leave the scene
        }
    }

    // agents that never spawned in time are closed out at the deadline
    if (tick_ > horizon_ + cfg_.overtime_steps) {
        for (auto& [id, st] : agents_) {
            if (st.termination == Termination::Running) {
                st.termination = Termination::Timeout;
                if (infos.find(id) == infos.end()) {
                    AgentStepInfo info;
                    info.termination = Termination::Timeout;
                    infos.emplace(id, info);
                }
            }
        }
    }

    contacts_ = std::move(contacts_now);
    return infos;
}

}  // namespace scensim
