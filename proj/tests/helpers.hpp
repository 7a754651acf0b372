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

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>

#include "scensim/scenario.hpp"

namespace scensim::test {

/// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        dir_ = std::filesystem::temp_directory_path() /
               ("scensim_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::remove_all(dir_);
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    const std::filesystem::path& path() const { return dir_; }
    std::filesystem::path operator/(const std::string& name) const { return dir_ / name; }

private:
    std::filesystem::path dir_;
};

/// Straight lane along +x: centerline (0,0) -> (length,0), polygon the
/// enclosing rectangle of the given width.
inline Lane straight_lane(const std::string& id, double length, double width = 3.5,
                          double y_offset = 0.0) {
    Lane lane;
    lane.id = id;
    lane.centerline = {{0.0, y_offset, 0.0}, {length, y_offset, 0.0}};
    lane.polygon = {{0.0, y_offset - width / 2.0},
                    {length, y_offset - width / 2.0},
                    {length, y_offset + width / 2.0},
                    {0.0, y_offset + width / 2.0}};
    return lane;
}

/// Straight-moving vehicle track along +x at constant speed.
inline ObjectTrack straight_track(int frames, double dt, Vec2 start, double speed,
                                  double heading = 0.0) {
    ObjectTrack t;
    t.type = ObjectType::Vehicle;
    t.length = 4.5;
    t.width = 1.8;
    t.height = 1.5;
    Vec2 dir{std::cos(heading), std::sin(heading)};
    for (int i = 0; i < frames; ++i) {
        Vec2 p = start + dir * (speed * dt * i);
        t.position.push_back({p.x, p.y, 0.0});
        t.heading.push_back(heading);
        t.velocity.push_back(dir * speed);
        t.valid.push_back(true);
    }
    return t;
}

/// Minimal well-formed scenario: one straight lane, one ego track.
inline ScenarioDescription minimal_scenario(int frames = 2, double lane_length = 100.0,
                                            double ego_speed = 5.0) {
    ScenarioDescription desc;
    desc.scenario_id = "fixture_minimal";
    desc.map_features.emplace("lane_0", straight_lane("lane_0", lane_length));
    desc.tracks.emplace("ego", straight_track(frames, 0.1, {2.0, 0.0}, ego_speed));
    desc.metadata.source = "fixture";
    desc.metadata.dt = 0.1;
    desc.metadata.episode_length = frames;
    desc.metadata.sdc_id = "ego";
    desc.refresh_statistics();
    return desc;
}

}  // namespace scensim::test
