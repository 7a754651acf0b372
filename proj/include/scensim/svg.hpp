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

#include "scensim/scenario.hpp"

namespace scensim {

struct SvgOptions {
    double extent = 100.0;  // meters of world shown, centered on the ego
    int size_px = 800;
};

/// Top-down view of one frame: lanes gray, lane lines by type, objects as
/// oriented rectangles colored by type, the ego highlighted.
std::string render_frame_svg(const ScenarioDescription& desc, int frame,
                             const SvgOptions& opts = {});

/// One SVG per frame, frame_000000.svg .. frame_{N-1}.svg.
void write_replay_frames(const ScenarioDescription& desc, const std::filesystem::path& out_dir,
                         const SvgOptions& opts = {});

}  // namespace scensim
