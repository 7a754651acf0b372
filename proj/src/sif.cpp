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
#include "scensim/sif.hpp"

#include <zlib.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace scensim {

using nlohmann::json;

// ---------------------------------------------------------------------------
// gzip
// ---------------------------------------------------------------------------

std::string gzip_compress(std::string_view data) {
    z_stream zs{};
    // windowBits 15+16 selects the gzip container; default header is
    // deterministic (mtime 0), which the byte-identity guarantees rely on
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        throw SifError("deflateInit2 failed");
    }
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    std::string out;
    char buf[1 << 15];
    int ret = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        ret = deflate(&zs, Z_FINISH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            deflateEnd(&zs);
            throw SifError("deflate failed");
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
    } while (ret != Z_STREAM_END);
    deflateEnd(&zs);
    return out;
}

std::string gzip_decompress(std::string_view data) {
    z_stream zs{};
    // windowBits 15+32: accept gzip or zlib wrapping
    if (inflateInit2(&zs, 15 + 32) != Z_OK) {
        throw SifError("inflateInit2 failed");
    }
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    std::string out;
    char buf[1 << 15];
    int ret = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            throw SifError("corrupt gzip payload");
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
        if (ret == Z_OK && zs.avail_out != 0 && zs.avail_in == 0) {
            inflateEnd(&zs);
            throw SifError("truncated gzip payload");
        }
    } while (ret != Z_STREAM_END);
    inflateEnd(&zs);
    return out;
}

std::string read_binary_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SifError("cannot open file: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_binary_file(const std::filesystem::path& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw SifError("cannot open file for writing: " + path.string());
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) {
        throw SifError("write failed: " + path.string());
    }
}

// ---------------------------------------------------------------------------
// JSON mapping
// ---------------------------------------------------------------------------

namespace {

json vec2_to_json(Vec2 v) { return json::array({v.x, v.y}); }
json vec3_to_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }

Vec2 vec2_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ScenarioError(std::string(what) + " is not an [x, y] pair");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

Vec3 vec3_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number()) {
        throw ScenarioError(std::string(what) + " is not an [x, y, z] triple");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <typename T>
json point_list_to_json(const std::vector<T>& pts);

template <>
json point_list_to_json(const std::vector<Vec2>& pts) {
    json arr = json::array();
    for (Vec2 p : pts) arr.push_back(vec2_to_json(p));
    return arr;
}

template <>
json point_list_to_json(const std::vector<Vec3>& pts) {
    json arr = json::array();
    for (Vec3 p : pts) arr.push_back(vec3_to_json(p));
    return arr;
}

json lane_to_json(const Lane& lane) {
    json j{{"kind", "lane"},
           {"polyline", point_list_to_json(lane.centerline)},
           {"polygon", point_list_to_json(lane.polygon)},
           {"entry_lanes", lane.entry_lanes},
           {"exit_lanes", lane.exit_lanes},
           {"left_neighbors", lane.left_neighbors},
           {"right_neighbors", lane.right_neighbors}};
    if (lane.speed_limit) {
        j["speed_limit"] = *lane.speed_limit;
    }
    return j;
}

json line_to_json(const LaneLine& line) {
    return {{"kind", "lane_line"},
            {"polyline", point_list_to_json(line.polyline)},
            {"line_type", line_type_name(line.type)}};
}

std::vector<Vec3> vec3_list_from_json(const json& j, const char* what) {
    if (!j.is_array()) {
        throw ScenarioError(std::string(what) + " is not an array");
    }
    std::vector<Vec3> out;
    out.reserve(j.size());
    for (const json& e : j) {
        out.push_back(vec3_from_json(e, what));
    }
    return out;
}

std::vector<Vec2> vec2_list_from_json(const json& j, const char* what) {
    if (!j.is_array()) {
        throw ScenarioError(std::string(what) + " is not an array");
    }
    std::vector<Vec2> out;
    out.reserve(j.size());
    for (const json& e : j) {
        out.push_back(vec2_from_json(e, what));
    }
    return out;
}

MapFeature feature_from_json(const std::string& id, const json& j) {
    if (!j.is_object() || !j.contains("kind")) {
        throw ScenarioError("map feature " + id + " lacks a kind");
    }
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "lane") {
        Lane lane;
        lane.id = id;
        lane.centerline = vec3_list_from_json(j.at("polyline"), "lane polyline");
        lane.polygon = vec2_list_from_json(j.at("polygon"), "lane polygon");
        if (j.contains("speed_limit") && !j.at("speed_limit").is_null()) {
            lane.speed_limit = j.at("speed_limit").get<double>();
        }
        for (auto [key, field] : {std::pair{"entry_lanes", &lane.entry_lanes},
                                  {"exit_lanes", &lane.exit_lanes},
                                  {"left_neighbors", &lane.left_neighbors},
                                  {"right_neighbors", &lane.right_neighbors}}) {
            if (j.contains(key)) {
                *field = j.at(key).get<std::vector<std::string>>();
            }
        }
        return lane;
    }
    if (kind == "lane_line") {
        LaneLine line;
        line.id = id;
        line.polyline = vec3_list_from_json(j.at("polyline"), "lane line polyline");
        auto type = line_type_from_name(j.at("line_type").get<std::string>());
        if (!type) {
            throw ScenarioError("map feature " + id + " has unknown line_type");
        }
        line.type = *type;
        return line;
    }
    throw ScenarioError("map feature " + id + " has unknown kind: " + kind);
}

json track_to_json(const ObjectTrack& t) {
    json positions = json::array();
    for (const Vec3& p : t.position) positions.push_back(vec3_to_json(p));
    json velocities = json::array();
    for (const Vec2& v : t.velocity) velocities.push_back(vec2_to_json(v));
    json j{{"type", object_type_name(t.type)},
           {"position", positions},
           {"heading", t.heading},
           {"velocity", velocities},
           {"valid", t.valid},
           {"length", t.length},
           {"width", t.width},
           {"height", t.height}};
    if (!t.metadata.empty()) {
        j["metadata"] = t.metadata;
    }
    return j;
}

ObjectTrack track_from_json(const std::string& id, const json& j) {
    ObjectTrack t;
    auto type = object_type_from_name(j.at("type").get<std::string>());
    if (!type) {
        throw ScenarioError("track " + id + " has unknown object type");
    }
    t.type = *type;
    t.position = vec3_list_from_json(j.at("position"), "track position");
    t.heading = j.at("heading").get<std::vector<double>>();
    t.velocity = vec2_list_from_json(j.at("velocity"), "track velocity");
    t.valid = j.at("valid").get<std::vector<bool>>();
    t.length = j.at("length").get<double>();
    t.width = j.at("width").get<double>();
    t.height = j.at("height").get<double>();
    if (j.contains("metadata")) {
        t.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    }
    return t;
}

json light_to_json(const TrafficLightTrack& l) {
    json states = json::array();
    for (LightState s : l.states) states.push_back(light_state_name(s));
    return {{"lane_id", l.lane_id}, {"states", states}, {"stop_point", vec3_to_json(l.stop_point)}};
}

TrafficLightTrack light_from_json(const std::string& id, const json& j) {
    TrafficLightTrack l;
    l.lane_id = j.at("lane_id").get<std::string>();
    for (const json& s : j.at("states")) {
        auto state = light_state_from_name(s.get<std::string>());
        if (!state) {
            throw ScenarioError("light " + id + " has unknown state value");
        }
        l.states.push_back(*state);
    }
    l.stop_point = vec3_from_json(j.at("stop_point"), "light stop_point");
    return l;
}

}  // namespace

json metadata_to_json(const ScenarioMetadata& meta) {
    json j{{"source", meta.source},
           {"dt", meta.dt},
           {"episode_length", meta.episode_length},
           {"sdc_id", meta.sdc_id},
           {"coordinate_convention", meta.coordinate_convention},
           {"object_count", meta.object_count},
           {"light_count", meta.light_count},
           {"per_object_moving_distance", meta.per_object_moving_distance},
           {"altitude_range", meta.altitude_range}};
    if (meta.difficulty) {
        j["difficulty"] = *meta.difficulty;
    }
    if (!meta.extras.empty()) {
        j["extras"] = meta.extras;
    }
    return j;
}

ScenarioMetadata metadata_from_json(const json& doc) {
    ScenarioMetadata meta;
    meta.source = doc.at("source").get<std::string>();
    meta.dt = doc.at("dt").get<double>();
    meta.episode_length = doc.at("episode_length").get<int>();
    meta.sdc_id = doc.at("sdc_id").get<std::string>();
    meta.coordinate_convention = doc.at("coordinate_convention").get<std::string>();
    meta.object_count = doc.at("object_count").get<int>();
    meta.light_count = doc.at("light_count").get<int>();
    meta.per_object_moving_distance =
        doc.at("per_object_moving_distance").get<std::map<std::string, double>>();
    meta.altitude_range = doc.at("altitude_range").get<double>();
    if (doc.contains("difficulty") && !doc.at("difficulty").is_null()) {
        meta.difficulty = doc.at("difficulty").get<double>();
    }
    if (doc.contains("extras")) {
        meta.extras = doc.at("extras").get<std::map<std::string, double>>();
    }
    return meta;
}

json scenario_to_json(const ScenarioDescription& desc) {
    json features = json::object();
    for (const auto& [id, feature] : desc.map_features) {
        features[id] = std::visit(
            [](const auto& f) {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Lane>) {
                    return lane_to_json(f);
                } else {
                    return line_to_json(f);
                }
            },
            feature);
    }
    json tracks = json::object();
    for (const auto& [id, track] : desc.tracks) {
        tracks[id] = track_to_json(track);
    }
    json lights = json::object();
    for (const auto& [id, light] : desc.dynamic_states) {
        lights[id] = light_to_json(light);
    }
    return {{"format_version", desc.format_version},
            {"scenario_id", desc.scenario_id},
            {"map_features", features},
            {"tracks", tracks},
            {"dynamic_states", lights},
            {"metadata", metadata_to_json(desc.metadata)}};
}

ScenarioDescription scenario_from_json(const json& doc) {
    if (!doc.is_object()) {
        throw ScenarioError("scenario document is not an object");
    }
    ScenarioDescription desc;
    desc.format_version = doc.at("format_version").get<std::string>();
    if (desc.format_version != kFormatVersion) {
        throw SifError("unsupported format_version: " + desc.format_version);
    }
    desc.scenario_id = doc.at("scenario_id").get<std::string>();
    for (const auto& [id, j] : doc.at("map_features").items()) {
        desc.map_features.emplace(id, feature_from_json(id, j));
    }
    for (const auto& [id, j] : doc.at("tracks").items()) {
        desc.tracks.emplace(id, track_from_json(id, j));
    }
    for (const auto& [id, j] : doc.at("dynamic_states").items()) {
        desc.dynamic_states.emplace(id, light_from_json(id, j));
    }
    desc.metadata = metadata_from_json(doc.at("metadata"));
    return desc;
}

// ---------------------------------------------------------------------------
// Structural validation of raw documents
// ---------------------------------------------------------------------------

namespace {

bool check_point_list(const json& j, std::size_t arity, const std::string& where,
                      const std::string& field, ValidationReport& report) {
    if (!j.is_array()) {
        report.add(where, field + " is not an array");
        return false;
    }
    for (const json& e : j) {
        if (!e.is_array() || e.size() != arity) {
            report.add(where, field + " not shape (N," + std::to_string(arity) + ")");
            return false;
        }
        for (const json& v : e) {
            if (!v.is_number()) {
                report.add(where, field + " contains a non-numeric value");
                return false;
            }
        }
    }
    return true;
}

}  // namespace

ValidationReport validate_scenario_json(const json& doc) {
    ValidationReport report;
    if (!doc.is_object()) {
        report.add("document", "not a JSON object");
        return report;
    }
    for (const char* key : {"format_version", "scenario_id", "map_features", "tracks",
                            "dynamic_states", "metadata"}) {
        if (!doc.contains(key)) {
            report.add("document", std::string("missing required key: ") + key);
        }
    }
    if (!report.pass) {
        return report;
    }
    if (doc.contains("tracks") && doc.at("tracks").is_object()) {
        for (const auto& [id, j] : doc.at("tracks").items()) {
            const std::string where = "tracks/" + id;
            for (const char* key : {"type", "position", "heading", "velocity", "valid",
                                    "length", "width", "height"}) {
                if (!j.contains(key)) {
                    report.add(where, std::string("missing required key: ") + key);
                }
            }
            if (j.contains("position")) {
                check_point_list(j.at("position"), 3, where, "position", report);
            }
            if (j.contains("velocity")) {
                check_point_list(j.at("velocity"), 2, where, "velocity", report);
            }
            if (j.contains("type") &&
                (!j.at("type").is_string() || !object_type_from_name(j.at("type").get<std::string>()))) {
                report.add(where, "unknown object type");
            }
        }
    }
    if (doc.contains("dynamic_states") && doc.at("dynamic_states").is_object()) {
        for (const auto& [id, j] : doc.at("dynamic_states").items()) {
            const std::string where = "dynamic_states/" + id;
            for (const char* key : {"lane_id", "states", "stop_point"}) {
                if (!j.contains(key)) {
                    report.add(where, std::string("missing required key: ") + key);
                }
            }
        }
    }
    if (!report.pass) {
        return report;
    }
    // structurally sound; run the semantic checks on the typed form
    try {
        return validate_scenario(scenario_from_json(doc));
    } catch (const std::exception& e) {
        report.add("document", e.what());
        return report;
    }
}

// ---------------------------------------------------------------------------
// File I/O
// ---------------------------------------------------------------------------

void write_sif_json(const json& doc, const std::filesystem::path& path) {
    write_binary_file(path, gzip_compress(doc.dump()));
}

json read_sif_json(const std::filesystem::path& path) {
    std::string text = gzip_decompress(read_binary_file(path));
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        throw SifError("corrupt scenario payload (not valid JSON): " + path.string());
    }
    return doc;
}

void write_scenario(const ScenarioDescription& desc, const std::filesystem::path& path) {
    ValidationReport report = validate_scenario(desc);
    if (!report.pass) {
        throw SifError("refusing to write invalid scenario " + desc.scenario_id + ": " +
                       report.to_string());
    }
    write_sif_json(scenario_to_json(desc), path);
}

ScenarioDescription read_scenario(const std::filesystem::path& path) {
    json doc = read_sif_json(path);
    if (doc.contains("format_version") && doc.at("format_version").is_string() &&
        doc.at("format_version").get<std::string>() != kFormatVersion) {
        throw SifError("unsupported format_version: " + doc.at("format_version").get<std::string>());
    }
    try {
        return scenario_from_json(doc);
    } catch (const json::exception& e) {
        throw SifError("malformed scenario document " + path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Frame logs
// ---------------------------------------------------------------------------

Frame frame_from_json(const json& doc) {
    Frame frame;
    frame.time_s = doc.at("t").get<double>();
    if (doc.contains("objects")) {
        for (const json& j : doc.at("objects")) {
            FrameObjectState obj;
            obj.object_id = j.at("id").get<std::string>();
            auto type = object_type_from_name(j.at("type").get<std::string>());
            if (!type) {
                throw ScenarioError("frame object " + obj.object_id + " has unknown type");
            }
            obj.type = *type;
            obj.position = vec3_from_json(j.at("position"), "frame object position");
            obj.heading = j.at("heading").get<double>();
            obj.velocity = vec2_from_json(j.at("velocity"), "frame object velocity");
            obj.length = j.at("length").get<double>();
            obj.width = j.at("width").get<double>();
            obj.height = j.at("height").get<double>();
            frame.objects.push_back(std::move(obj));
        }
    }
    return frame;
}

FrameLog read_frame_log(const std::filesystem::path& path) {
    std::string raw = read_binary_file(path);
    if (raw.size() >= 2 && static_cast<unsigned char>(raw[0]) == 0x1f &&
        static_cast<unsigned char>(raw[1]) == 0x8b) {
        raw = gzip_decompress(raw);
    }
    FrameLog log;
    std::istringstream in(raw);
    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, std::vector<std::pair<std::size_t, json>>> light_states;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded()) {
            throw SifError("frame log " + path.string() + ": line " + std::to_string(line_no) +
                           " is not valid JSON");
        }
        if (doc.contains("map_features") && log.map_features.empty()) {
            for (const auto& [id, j] : doc.at("map_features").items()) {
                log.map_features.emplace(id, feature_from_json(id, j));
            }
        }
        if (doc.contains("sdc_id") && log.sdc_id.empty()) {
            log.sdc_id = doc.at("sdc_id").get<std::string>();
        }
        std::size_t frame_idx = log.frames.size();
        log.frames.push_back(frame_from_json(doc));
        if (doc.contains("lights")) {
            for (const json& j : doc.at("lights")) {
                light_states[j.at("id").get<std::string>()].emplace_back(frame_idx, j);
            }
        }
    }
    const std::size_t n = log.frames.size();
    for (auto& [id, states] : light_states) {
        TrafficLightTrack track;
        track.states.assign(n, LightState::Unknown);
        for (const auto& [frame_idx, j] : states) {
            auto state = light_state_from_name(j.at("state").get<std::string>());
            if (!state) {
                throw ScenarioError("light " + id + " has unknown state value");
            }
            track.states[frame_idx] = *state;
            track.lane_id = j.at("lane_id").get<std::string>();
            if (j.contains("stop_point")) {
                track.stop_point = vec3_from_json(j.at("stop_point"), "light stop_point");
            }
        }
        log.lights.emplace(id, std::move(track));
    }
    return log;
}

ScenarioDescription scenario_from_frame_log(const FrameLog& log, const std::string& scenario_id,
                                            const std::string& source) {
    if (log.frames.size() < 2) {
        throw ScenarioError("frame log has fewer than 2 frames");
    }
    const double dt = log.frames[1].time_s - log.frames[0].time_s;
    if (!(dt > 0.0)) {
        throw ScenarioError("frame log timestamps are not increasing");
    }
    for (std::size_t i = 1; i < log.frames.size(); ++i) {
        double step = log.frames[i].time_s - log.frames[i - 1].time_s;
        if (std::abs(step - dt) > 1e-6) {
            throw ScenarioError("frame log dt is not uniform at frame " + std::to_string(i));
        }
    }
    ScenarioDescription desc;
    desc.scenario_id = scenario_id;
    desc.map_features = log.map_features;
    desc.tracks = transpose_frame_log(log.frames);
    for (auto& [id, track] : desc.tracks) {
        for (double& h : track.heading) {
            h = wrap_angle(h);
        }
    }
    desc.dynamic_states = log.lights;
    desc.metadata.source = source;
    desc.metadata.dt = dt;
    desc.metadata.episode_length = static_cast<int>(log.frames.size());
    if (!log.sdc_id.empty()) {
        desc.metadata.sdc_id = log.sdc_id;
    } else {
        for (const auto& [id, track] : desc.tracks) {
            if (track.type == ObjectType::Vehicle) {
                desc.metadata.sdc_id = id;
                break;
            }
        }
    }
    desc.refresh_statistics();
    return desc;
}

}  // namespace scensim
