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
#include "scensim/svg.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace scensim {

namespace {

const char* fill_for(ObjectType type) {
    switch (type) {
        case ObjectType::Vehicle: return "#3b75c4";
        case ObjectType::Pedestrian: return "#e67e22";
        case ObjectType::Cyclist: return "#8e44ad";
        case ObjectType::Cone: return "#f1c40f";
        case ObjectType::Barrier: return "#c0392b";
    }
    return "#3b75c4";
}

struct Viewport {
    Vec2 center;
    double extent;
    int size;

    double px(double x) const { return (x - center.x + extent / 2.0) / extent * size; }
    double py(double y) const { return (center.y + extent / 2.0 - y) / extent * size; }
    double scale(double meters) const { return meters / extent * size; }
};

void append_polyline(std::ostringstream& out, const Viewport& vp, const std::vector<Vec3>& pts,
                     const char* stroke, double width_m, const char* dash) {
    out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
        << vp.scale(width_m) << "\"";
    if (dash != nullptr) {
        out << " stroke-dasharray=\"" << vp.scale(2.0) << " " << vp.scale(2.0) << "\"";
    }
    out << " points=\"";
    for (const Vec3& p : pts) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", vp.px(p.x), vp.py(p.y));
        out << buf;
    }
    out << "\"/>\n";
}

void append_polygon(std::ostringstream& out, const Viewport& vp, const std::vector<Vec2>& ring,
                    const char* fill) {
    out << "<polygon fill=\"" << fill << "\" stroke=\"none\" points=\"";
    for (const Vec2& p : ring) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", vp.px(p.x), vp.py(p.y));
        out << buf;
    }
    out << "\"/>\n";
}

}  // namespace

std::string render_frame_svg(const ScenarioDescription& desc, int frame, const SvgOptions& opts) {
    if (frame < 0 || frame >= desc.metadata.episode_length) {
        throw ScenarioError("frame out of range: " + std::to_string(frame));
    }
    Viewport vp{{0.0, 0.0}, opts.extent, opts.size_px};
    auto sdc = desc.tracks.find(desc.metadata.sdc_id);
    if (sdc != desc.tracks.end()) {
        // center on the ego's latest recorded pose up to this frame
        int f = std::min<int>(frame, static_cast<int>(sdc->second.position.size()) - 1);
        while (f > 0 && !sdc->second.valid[static_cast<std::size_t>(f)]) {
            --f;
        }
        if (f >= 0) {
            vp.center = sdc->second.position[static_cast<std::size_t>(f)].xy();
        }
    }

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.size_px << "\" height=\""
        << opts.size_px << "\" viewBox=\"0 0 " << opts.size_px << " " << opts.size_px << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"#1b1e23\"/>\n";

    for (const auto& [id, feature] : desc.map_features) {
        if (const Lane* lane = std::get_if<Lane>(&feature)) {
            append_polygon(out, vp, lane->polygon, "#4a4e55");
        }
    }
    for (const auto& [id, feature] : desc.map_features) {
        if (const LaneLine* line = std::get_if<LaneLine>(&feature)) {
            switch (line->type) {
                case LineType::Broken:
                    append_polyline(out, vp, line->polyline, "#c9cdd3", 0.15, "dash");
                    break;
                case LineType::Solid:
                    append_polyline(out, vp, line->polyline, "#f5f6f7", 0.2, nullptr);
                    break;
                case LineType::RoadEdge:
                    append_polyline(out, vp, line->polyline, "#8a9099", 0.25, nullptr);
                    break;
            }
        }
    }

    for (const auto& [id, track] : desc.tracks) {
        auto f = static_cast<std::size_t>(frame);
        if (f >= track.valid.size() || !track.valid[f]) {
            continue;
        }
        const bool is_ego = id == desc.metadata.sdc_id;
        Obb box{track.position[f].xy(), track.heading[f], track.length, track.width};
        out << "<polygon fill=\"" << (is_ego ? "#20d178" : fill_for(track.type)) << "\"";
        if (is_ego) {
            out << " stroke=\"#ffffff\" stroke-width=\"" << vp.scale(0.2) << "\"";
        }
        out << " points=\"";
        for (const Vec2& c : box.corners()) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", vp.px(c.x), vp.py(c.y));
            out << buf;
        }
        out << "\"/>\n";
    }
    out << "</svg>\n";
    return std::move(out).str();
}

void write_replay_frames(const ScenarioDescription& desc, const std::filesystem::path& out_dir,
                         const SvgOptions& opts) {
    std::filesystem::create_directories(out_dir);
    for (int frame = 0; frame < desc.metadata.episode_length; ++frame) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06d.svg", frame);
        std::ofstream out(out_dir / name, std::ios::trunc);
        if (!out) {
            throw ScenarioError("cannot write frame file in " + out_dir.string());
        }
        out << render_frame_svg(desc, frame, opts);
    }
}

}  // namespace scensim
