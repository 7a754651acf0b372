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

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "scensim/scenario.hpp"

namespace scensim {

struct SifError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// gzip container helpers (deterministic: fixed level, zeroed header fields)
std::string gzip_compress(std::string_view data);
std::string gzip_decompress(std::string_view data);

std::string read_binary_file(const std::filesystem::path& path);
void write_binary_file(const std::filesystem::path& path, std::string_view data);

// JSON mapping. Serialization uses shortest round-trip decimals, so
// from_json(to_json(d)) == d including float bit patterns.
nlohmann::json scenario_to_json(const ScenarioDescription& desc);
ScenarioDescription scenario_from_json(const nlohmann::json& doc);

nlohmann::json metadata_to_json(const ScenarioMetadata& meta);
ScenarioMetadata metadata_from_json(const nlohmann::json& doc);

/// Structural validation of a raw document (key presence, value types,
/// (N,3) position shape), then the semantic checks of validate_scenario.
ValidationReport validate_scenario_json(const nlohmann::json& doc);

/// Validates, serializes, and writes one gzip-compressed `.sif` file.
/// Throws SifError when the description fails validation or on I/O failure.
void write_scenario(const ScenarioDescription& desc, const std::filesystem::path& path);

/// Reads and parses one `.sif` file. Throws SifError on I/O failure,
/// corrupt payload, unsupported format_version, or structural defects.
ScenarioDescription read_scenario(const std::filesystem::path& path);

// Raw-access variants for tooling and fixtures.
void write_sif_json(const nlohmann::json& doc, const std::filesystem::path& path);
nlohmann::json read_sif_json(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Frame-centric logs: newline-delimited JSON, one frame per line.
// ---------------------------------------------------------------------------

/// Parses one frame record line. Format documented in docs/sif_format.md.
Frame frame_from_json(const nlohmann::json& doc);

struct FrameLog {
    std::vector<Frame> frames;
    MapFeatures map_features;                       // optional, from any line
    std::map<std::string, TrafficLightTrack> lights;  // assembled per frame
    std::string sdc_id;                             // optional hint
};

/// Reads a whole newline-delimited log (plain text or gzipped).
FrameLog read_frame_log(const std::filesystem::path& path);

/// Assembles a scenario from a frame log: transposes tracks, derives dt
/// from the frame timestamps (which must be uniform), normalizes headings,
/// picks the sdc (hint, else lexicographically first vehicle), refreshes
/// statistics. Difficulty is left unset.
ScenarioDescription scenario_from_frame_log(const FrameLog& log, const std::string& scenario_id,
                                            const std::string& source);

}  // namespace scensim
