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
#include <string>
#include <vector>

#include "scensim/map.hpp"

namespace scensim {

constexpr const char* kFormatVersion = "1.0";
constexpr const char* kCoordinateConvention = "right-handed, z-up, meters";

enum class ObjectType { Vehicle, Pedestrian, Cyclist, Cone, Barrier };
enum class LightState { Red, Yellow, Green, Unknown };

const char* object_type_name(ObjectType t);
std::optional<ObjectType> object_type_from_name(const std::string& name);
const char* light_state_name(LightState s);
std::optional<LightState> light_state_from_name(const std::string& name);

/// One object's state sequence across the episode. All arrays share the
/// episode length N; frames with valid=false carry zero padding.
struct ObjectTrack {
    ObjectType type = ObjectType::Vehicle;
    std::vector<Vec3> position;
    std::vector<double> heading;
    std::vector<Vec2> velocity;
    std::vector<bool> valid;
    double length = 0.0;
    double width = 0.0;
    double height = 0.0;
    std::map<std::string, std::string> metadata;

    bool operator==(const ObjectTrack&) const = default;

    std::size_t frames() const { return position.size(); }
    int first_valid_frame() const;  // -1 if never valid
    int last_valid_frame() const;   // -1 if never valid

    /// 2D polyline length over the valid positions.
    double moving_distance() const;
};

struct TrafficLightTrack {
    std::string lane_id;
    std::vector<LightState> states;
    Vec3 stop_point;

    bool operator==(const TrafficLightTrack&) const = default;
};

struct ScenarioMetadata {
    std::string source;
    double dt = 0.1;
    int episode_length = 0;
    std::string sdc_id;
    std::string coordinate_convention = kCoordinateConvention;
    int object_count = 0;
    int light_count = 0;
    std::map<std::string, double> per_object_moving_distance;
    double altitude_range = 0.0;
    std::optional<double> difficulty;
    // miscellaneous per-scenario fields added by converters
    std::map<std::string, double> extras;

    bool operator==(const ScenarioMetadata&) const = default;
};

struct ScenarioDescription {
    std::string scenario_id;
    std::string format_version = kFormatVersion;
    MapFeatures map_features;
    std::map<std::string, ObjectTrack> tracks;
    std::map<std::string, TrafficLightTrack> dynamic_states;
    ScenarioMetadata metadata;

    bool operator==(const ScenarioDescription&) const;

    const ObjectTrack& sdc_track() const;

    /// Recompute object_count/light_count/per_object_moving_distance/
    /// altitude_range from the content tables. Converters call this last.
    void refresh_statistics();
};

struct Violation {
    std::string where;
    std::string what;
};

struct ValidationReport {
    bool pass = true;
    std::vector<Violation> violations;

    void add(std::string where, std::string what) {
        pass = false;
        violations.push_back({std::move(where), std::move(what)});
    }
    std::string to_string() const;
};

/// Checks every invariant of the description: shapes, array-length
/// consistency, heading range, referential integrity, metadata counts.
/// Never mutates; violations become report entries, not faults.
ValidationReport validate_scenario(const ScenarioDescription& desc);

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Full state sequence of one object; frames with valid=false are included
/// but flagged by the mask. Throws ScenarioError on an unknown id.
const ObjectTrack& get_object_states(const ScenarioDescription& desc, const std::string& object_id);

// ---------------------------------------------------------------------------
// Frame-centric logs
// ---------------------------------------------------------------------------

struct FrameObjectState {
    std::string object_id;
    ObjectType type = ObjectType::Vehicle;
    Vec3 position;
    double heading = 0.0;
    Vec2 velocity;
    double length = 0.0;
    double width = 0.0;
    double height = 0.0;
};

struct Frame {
    double time_s = 0.0;
    std::vector<FrameObjectState> objects;
};

/// Turns a frame-centric log into object-centric tracks, padding frames
/// where an id is absent with zeros and valid=false. Output length equals
/// the number of frames. Throws ScenarioError when the same id changes
/// object_type across frames.
std::map<std::string, ObjectTrack> transpose_frame_log(const std::vector<Frame>& frames);

/// Inverse of transpose_frame_log: expands tracks back to per-frame records
/// (valid frames only), for round-trip checks.
std::vector<Frame> expand_to_frames(const std::map<std::string, ObjectTrack>& tracks, double dt);

}  // namespace scensim
