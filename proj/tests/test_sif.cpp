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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "scensim/pg.hpp"
#include "scensim/sif.hpp"

using namespace scensim;
using test::minimal_scenario;
using test::TempDir;

TEST_CASE("gzip round trip and corruption detection") {
    std::string payload = "hello scenario world";
    std::string packed = gzip_compress(payload);
    CHECK(gzip_decompress(packed) == payload);
    CHECK(packed.substr(0, 2) == std::string("\x1f\x8b", 2));

    std::string truncated = packed.substr(0, packed.size() / 2);
    CHECK_THROWS_AS(gzip_decompress(truncated), SifError);
    CHECK_THROWS_AS(gzip_decompress("not gzip at all"), SifError);
}

TEST_CASE("write/read round trip is field-exact") {
    TempDir dir("sif_roundtrip");
    ScenarioDescription desc = minimal_scenario(5);
    // adversarial float values that expose lossy serialization
    desc.tracks.at("ego").position[3] = {0.1 + 0.2, 1.0 / 3.0, -0.000123456789012345};
    desc.tracks.at("ego").heading[3] = -3.131592653589793;
    desc.tracks.at("ego").metadata["origin"] = "unit-test";
    desc.refresh_statistics();

    auto path = dir / "a.sif";
    write_scenario(desc, path);
    ScenarioDescription back = read_scenario(path);
    CHECK(back == desc);
    CHECK(back.tracks.at("ego").position[3].x == desc.tracks.at("ego").position[3].x);
}

TEST_CASE("unsupported format version is rejected") {
    TempDir dir("sif_version");
    nlohmann::json doc = scenario_to_json(minimal_scenario());
    doc["format_version"] = "99.0";
    auto path = dir / "v99.sif";
    write_sif_json(doc, path);
    CHECK_THROWS_WITH_AS(read_scenario(path), doctest::Contains("unsupported format_version"),
                         SifError);
}

TEST_CASE("corrupt and truncated files are rejected") {
    TempDir dir("sif_corrupt");
    auto path = dir / "bad.sif";
    write_binary_file(path, "garbage bytes");
    CHECK_THROWS_AS(read_scenario(path), SifError);

    write_scenario(minimal_scenario(), path);
    std::string bytes = read_binary_file(path);
    write_binary_file(path, bytes.substr(0, bytes.size() - 8));
    CHECK_THROWS_AS(read_scenario(path), SifError);

    CHECK_THROWS_AS(read_scenario(dir / "missing.sif"), SifError);
}

TEST_CASE("writing an invalid scenario is refused") {
    TempDir dir("sif_invalid");
    ScenarioDescription desc = minimal_scenario();
    desc.metadata.sdc_id = "ghost";
    CHECK_THROWS_AS(write_scenario(desc, dir / "bad.sif"), SifError);
}

TEST_CASE("re-serialization of a generated 200-frame scenario is byte-identical") {
    TempDir dir("sif_bytes");
    PGConfig cfg;
    cfg.seed = 0;
    ScenarioDescription desc = generate_scenario(cfg);
    CHECK(desc.metadata.episode_length == 200);

    auto first = dir / "first.sif";
    auto second = dir / "second.sif";
    write_scenario(desc, first);
    write_scenario(read_scenario(first), second);
    CHECK(read_binary_file(first) == read_binary_file(second));
}

TEST_CASE("randomized valid scenarios survive the round trip") {
    TempDir dir("sif_random");
    DetRng rng(13);
    for (int trial = 0; trial < 25; ++trial) {
        int frames = 2 + static_cast<int>(rng.next_below(40));
        ScenarioDescription desc = minimal_scenario(frames, rng.uniform(30.0, 300.0));
        desc.scenario_id = "rand_" + std::to_string(trial);
        int extra = static_cast<int>(rng.next_below(5));
        for (int o = 0; o < extra; ++o) {
            ObjectTrack t = test::straight_track(frames, 0.1,
                                                 {rng.uniform(-50, 50), rng.uniform(-50, 50)},
                                                 rng.uniform(0.0, 20.0), wrap_angle(rng.uniform(-3, 3)));
            t.type = rng.next_below(2) == 0 ? ObjectType::Pedestrian : ObjectType::Cyclist;
            for (std::size_t f = 0; f < t.valid.size(); ++f) {
                t.valid[f] = rng.next_double() > 0.2;
            }
            for (std::size_t f = 0; f < t.position.size(); ++f) {
                t.position[f].z = rng.uniform(-5.0, 5.0);
            }
            desc.tracks.emplace("extra" + std::to_string(o), std::move(t));
        }
        desc.refresh_statistics();
        REQUIRE(validate_scenario(desc).pass);

        auto path = dir / (desc.scenario_id + ".sif");
        write_scenario(desc, path);
        ScenarioDescription back = read_scenario(path);
        CHECK(back == desc);
        CHECK(validate_scenario(back).pass);
    }
}

TEST_CASE("frame logs parse, carry maps and lights, and assemble scenarios") {
    TempDir dir("framelog");
    nlohmann::json lane = {{"kind", "lane"},
                           {"polyline", {{0.0, 0.0, 0.0}, {100.0, 0.0, 0.0}}},
                           {"polygon", {{0.0, -1.75}, {100.0, -1.75}, {100.0, 1.75}, {0.0, 1.75}}},
                           {"speed_limit", 13.9}};
    std::string lines;
    for (int f = 0; f < 4; ++f) {
        nlohmann::json frame{{"t", 0.1 * f}};
        if (f == 0) {
            frame["map_features"] = {{"lane_0", lane}};
            frame["sdc_id"] = "car";
        }
        frame["objects"] = nlohmann::json::array();
        frame["objects"].push_back({{"id", "car"},
                                    {"type", "vehicle"},
                                    {"position", {1.0 * f, 0.0, 0.0}},
                                    {"heading", 0.0},
                                    {"velocity", {10.0, 0.0}},
                                    {"length", 4.5},
                                    {"width", 1.8},
                                    {"height", 1.5}});
        if (f >= 2) {
            frame["objects"].push_back({{"id", "walker"},
                                        {"type", "pedestrian"},
                                        {"position", {5.0, 5.0, 0.0}},
                                        {"heading", 7.0},  // normalized on assembly
                                        {"velocity", {0.0, 0.0}},
                                        {"length", 0.5},
                                        {"width", 0.5},
                                        {"height", 1.8}});
        }
        frame["lights"] = nlohmann::json::array();
        frame["lights"].push_back({{"id", "tl"},
                                   {"lane_id", "lane_0"},
                                   {"state", f < 2 ? "Red" : "Green"},
                                   {"stop_point", {50.0, 0.0, 0.0}}});
        lines += frame.dump() + "\n";
    }
    auto path = dir / "log.jsonl";
    write_binary_file(path, lines);

    FrameLog log = read_frame_log(path);
    CHECK(log.frames.size() == 4);
    CHECK(log.map_features.size() == 1);
    CHECK(log.sdc_id == "car");
    REQUIRE(log.lights.count("tl") == 1);
    CHECK(log.lights.at("tl").states ==
          std::vector<LightState>{LightState::Red, LightState::Red, LightState::Green,
                                  LightState::Green});

    ScenarioDescription desc = scenario_from_frame_log(log, "converted", "testlog");
    CHECK(validate_scenario(desc).pass);
    CHECK(desc.metadata.dt == doctest::Approx(0.1));
    CHECK(desc.metadata.episode_length == 4);
    CHECK(desc.metadata.sdc_id == "car");
    CHECK(desc.tracks.at("walker").valid == std::vector<bool>{false, false, true, true});
    CHECK(desc.tracks.at("walker").heading[2] == doctest::Approx(wrap_angle(7.0)));

    // gzipped logs load the same way
    auto gz_path = dir / "log.jsonl.gz";
    write_binary_file(gz_path, gzip_compress(lines));
    CHECK(read_frame_log(gz_path).frames.size() == 4);

    // non-uniform dt is rejected
    std::string bad = lines + nlohmann::json{{"t", 1.7}}.dump() + "\n";
    write_binary_file(path, bad);
    CHECK_THROWS_AS(scenario_from_frame_log(read_frame_log(path), "x", "y"), ScenarioError);
}
