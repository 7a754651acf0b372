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
#include "scensim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace scensim {

const char* object_type_name(ObjectType t) {
    switch (t) {
        case ObjectType::Vehicle: return "vehicle";
        case ObjectType::Pedestrian: return "pedestrian";
        case ObjectType::Cyclist: return "cyclist";
        case ObjectType::Cone: return "cone";
        case ObjectType::Barrier: return "barrier";
    }
    return "vehicle";
}

std::optional<ObjectType> object_type_from_name(const std::string& name) {
    if (name == "vehicle") return ObjectType::Vehicle;
    if (name == "pedestrian") return ObjectType::Pedestrian;
    if (name == "cyclist") return ObjectType::Cyclist;
    if (name == "cone") return ObjectType::Cone;
    if (name == "barrier") return ObjectType::Barrier;
    return std::nullopt;
}

const char* light_state_name(LightState s) {
    switch (s) {
        case LightState::Red: return "Red";
        case LightState::Yellow: return "Yellow";
        case LightState::Green: return "Green";
        case LightState::Unknown: return "Unknown";
    }
    return "Unknown";
}

std::optional<LightState> light_state_from_name(const std::string& name) {
    if (name == "Red") return LightState::Red;
    if (name == "Yellow") return LightState::Yellow;
    if (name == "Green") return LightState::Green;
    if (name == "Unknown") return LightState::Unknown;
    return std::nullopt;
}

int ObjectTrack::first_valid_frame() const {
    for (std::size_t i = 0; i < valid.size(); ++i) {
        if (valid[i]) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

int ObjectTrack::last_valid_frame() const {
    for (std::size_t i = valid.size(); i > 0; --i) {
        if (valid[i - 1]) {
            return static_cast<int>(i - 1);
        }
    }
    return -1;
}

double ObjectTrack::moving_distance() const {
    double total = 0.0;
    bool have_prev = false;
    Vec2 prev;
    for (std::size_t i = 0; i < position.size(); ++i) {
        if (i < valid.size() && !valid[i]) {
            continue;
        }
        Vec2 p = position[i].xy();
        if (have_prev) {
            total += (p - prev).norm();
        }
        prev = p;
        have_prev = true;
    }
    return total;
}

bool ScenarioDescription::operator==(const ScenarioDescription& o) const {
    return scenario_id == o.scenario_id && format_version == o.format_version &&
           map_features == o.map_features && tracks == o.tracks &&
           dynamic_states == o.dynamic_states && metadata == o.metadata;
}

const ObjectTrack& ScenarioDescription::sdc_track() const {
    auto it = tracks.find(metadata.sdc_id);
    if (it == tracks.end()) {
        throw ScenarioError("sdc track not found: " + metadata.sdc_id);
    }
    return it->second;
}

void ScenarioDescription::refresh_statistics() {
    metadata.object_count = static_cast<int>(tracks.size());
    metadata.light_count = static_cast<int>(dynamic_states.size());
    metadata.per_object_moving_distance.clear();
    for (const auto& [id, track] : tracks) {
        metadata.per_object_moving_distance[id] = track.moving_distance();
    }
    metadata.altitude_range = 0.0;
    auto it = tracks.find(metadata.sdc_id);
    if (it != tracks.end()) {
        double zmin = 0.0, zmax = 0.0;
        bool any = false;
        for (std::size_t i = 0; i < it->second.position.size(); ++i) {
            if (i < it->second.valid.size() && !it->second.valid[i]) {
                continue;
            }
            double z = it->second.position[i].z;
            if (!any) {
                zmin = zmax = z;
                any = true;
            } else {
                zmin = std::min(zmin, z);
                zmax = std::max(zmax, z);
            }
        }
        metadata.altitude_range = any ? zmax - zmin : 0.0;
    }
}

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    out << (pass ? "pass" : "fail");
    for (const Violation& v : violations) {
        out << "\n  [" << v.where << "] " << v.what;
    }
    return out.str();
}

namespace {

void validate_track(const std::string& id, const ObjectTrack& t, std::size_t n, ValidationReport& report) {
    const std::string where = "tracks/" + id;
    if (t.position.size() != n) {
        report.add(where, "position not shape (N,3): has " + std::to_string(t.position.size()) +
                              " frames, episode_length is " + std::to_string(n));
    }
    if (t.heading.size() != n) {
        report.add(where, "heading length " + std::to_string(t.heading.size()) + " != N");
    }
    if (t.velocity.size() != n) {
        report.add(where, "velocity length " + std::to_string(t.velocity.size()) + " != N");
    }
    if (t.valid.size() != n) {
        report.add(where, "valid length " + std::to_string(t.valid.size()) + " != N");
    }
    if (!(t.length > 0.0) || !(t.width > 0.0)) {
        report.add(where, "length and width must be positive");
    }
    for (double h : t.heading) {
        if (!(h >= -kPi && h < kPi)) {
            report.add(where, "heading value outside [-pi, pi)");
            break;
        }
    }
    for (const Vec3& p : t.position) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
            report.add(where, "non-finite position value");
            break;
        }
    }
}

}  // namespace

ValidationReport validate_scenario(const ScenarioDescription& desc) {
    ValidationReport report;
    if (desc.scenario_id.empty()) {
        report.add("scenario_id", "empty scenario id");
    }
    if (desc.format_version != kFormatVersion) {
        report.add("format_version", "unsupported format_version: " + desc.format_version);
    }
    const std::size_t n = static_cast<std::size_t>(std::max(desc.metadata.episode_length, 0));
    if (!(desc.metadata.dt > 0.0)) {
        report.add("metadata", "dt must be positive");
    }
    if (desc.metadata.episode_length < 2) {
        report.add("metadata", "episode_length must be >= 2");
    }

    auto sdc = desc.tracks.find(desc.metadata.sdc_id);
    if (sdc == desc.tracks.end()) {
        report.add("metadata", "sdc_id refers to no track: " + desc.metadata.sdc_id);
    } else if (sdc->second.type != ObjectType::Vehicle) {
        report.add("metadata", "sdc track is not a vehicle");
    }

    for (const auto& [id, track] : desc.tracks) {
        validate_track(id, track, n, report);
    }

    for (const auto& [id, light] : desc.dynamic_states) {
        const std::string where = "dynamic_states/" + id;
        if (light.states.size() != n) {
            report.add(where, "states length " + std::to_string(light.states.size()) + " != N");
        }
        auto it = desc.map_features.find(light.lane_id);
        if (it == desc.map_features.end() || !std::holds_alternative<Lane>(it->second)) {
            report.add(where, "dangling lane reference: " + light.lane_id);
        }
    }

    for (const LaneValidationIssue& issue : validate_map_features(desc.map_features)) {
        report.add("map_features/" + issue.feature_id, issue.what);
    }

    if (desc.metadata.object_count != static_cast<int>(desc.tracks.size())) {
        report.add("metadata", "object_count does not match tracks table size");
    }
    if (desc.metadata.light_count != static_cast<int>(desc.dynamic_states.size())) {
        report.add("metadata", "light_count does not match dynamic_states table size");
    }
    return report;
}

const ObjectTrack& get_object_states(const ScenarioDescription& desc, const std::string& object_id) {
    auto it = desc.tracks.find(object_id);
    if (it == desc.tracks.end()) {
        throw ScenarioError("unknown object id: " + object_id);
    }
    return it->second;
}

// ---------------------------------------------------------------------------
// Frame-centric logs
// ---------------------------------------------------------------------------

std::map<std::string, ObjectTrack> transpose_frame_log(const std::vector<Frame>& frames) {
    const std::size_t n = frames.size();
    std::map<std::string, ObjectTrack> tracks;
    for (std::size_t f = 0; f < n; ++f) {
        for (const FrameObjectState& obj : frames[f].objects) {
            auto [it, inserted] = tracks.try_emplace(obj.object_id);
            ObjectTrack& track = it->second;
            if (inserted) {
                track.type = obj.type;
                track.position.assign(n, Vec3{});
                track.heading.assign(n, 0.0);
                track.velocity.assign(n, Vec2{});
                track.valid.assign(n, false);
                track.length = obj.length;
                track.width = obj.width;
                track.height = obj.height;
            } else if (track.type != obj.type) {
                throw ScenarioError("object " + obj.object_id + " changes type across frames: " +
                                    object_type_name(track.type) + " vs " + object_type_name(obj.type));
            }
            track.position[f] = obj.position;
            track.heading[f] = obj.heading;
            track.velocity[f] = obj.velocity;
            track.valid[f] = true;
        }
    }
    return tracks;
}

std::vector<Frame> expand_to_frames(const std::map<std::string, ObjectTrack>& tracks, double dt) {
    std::size_t n = 0;
    for (const auto& [id, track] : tracks) {
        n = std::max(n, track.frames());
    }
    std::vector<Frame> frames(n);
    for (std::size_t f = 0; f < n; ++f) {
        frames[f].time_s = static_cast<double>(f) * dt;
        for (const auto& [id, track] : tracks) {
            if (f >= track.valid.size() || !track.valid[f]) {
                continue;
            }
            frames[f].objects.push_back({id, track.type, track.position[f], track.heading[f],
                                         track.velocity[f], track.length, track.width, track.height});
        }
    }
    return frames;
}

}  // namespace scensim
