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
#include "scensim/pg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "scensim/idm.hpp"
#include "scensim/metrics.hpp"

namespace scensim {

using nlohmann::json;

namespace {

// distinct rng streams per generation stage
constexpr std::uint64_t kMapStream = 0x6d61702d73656564ULL;
constexpr std::uint64_t kTrafficStream = 0x7472616666696331ULL;

constexpr double kStaticLeaderSpeed = 0.1;   // below this a leader counts as static
constexpr double kStaticLeaderGap = 12.0;    // and only when this close
constexpr double kStaticLeaderPatience = 3.0;  // seconds before a lane change
constexpr double kLaneChangeDuration = 2.0;    // lateral blend time
constexpr double kFreeBehind = 15.0;         // required clear window on the target lane
constexpr double kFreeAhead = 30.0;

}  // namespace

void PGConfig::validate() const {
    if (num_blocks < 1) {
        throw PgError("num_blocks must be >= 1");
    }
    if (straight_weight < 0.0 || curve_weight < 0.0 || intersection_weight < 0.0 ||
        straight_weight + curve_weight + intersection_weight <= 0.0) {
        throw PgError("block weights must be nonnegative and not all zero");
    }
    if (!(traffic_density >= 0.0)) {
        throw PgError("traffic_density must be >= 0");
    }
    if (!(dt > 0.0) || !(duration_s > 0.0)) {
        throw PgError("duration and dt must be positive");
    }
    double steps = duration_s / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9) {
        throw PgError("duration_s must be an integral number of dt steps");
    }
    if (lanes_per_road < 1) {
        throw PgError("lanes_per_road must be >= 1");
    }
    if (!(lane_width > 0.0)) {
        throw PgError("lane_width must be positive");
    }
}

PGConfig PGConfig::from_json(const json& doc) {
    PGConfig cfg;
    auto get = [&](const char* key, auto& field) {
        if (doc.contains(key)) {
            field = doc.at(key).get<std::decay_t<decltype(field)>>();
        }
    };
    get("seed", cfg.seed);
    get("num_blocks", cfg.num_blocks);
    get("straight_weight", cfg.straight_weight);
    get("curve_weight", cfg.curve_weight);
    get("intersection_weight", cfg.intersection_weight);
    get("traffic_density", cfg.traffic_density);
    get("duration_s", cfg.duration_s);
    get("dt", cfg.dt);
    get("lanes_per_road", cfg.lanes_per_road);
    get("construction_prob", cfg.construction_prob);
    get("lane_width", cfg.lane_width);
    get("straight_length_min", cfg.straight_length_min);
    get("straight_length_max", cfg.straight_length_max);
    get("curve_radius_min", cfg.curve_radius_min);
    get("curve_radius_max", cfg.curve_radius_max);
    get("curve_angle_min_deg", cfg.curve_angle_min_deg);
    get("curve_angle_max_deg", cfg.curve_angle_max_deg);
    get("arm_length", cfg.arm_length);
    get("speed_limit_min", cfg.speed_limit_min);
    get("speed_limit_max", cfg.speed_limit_max);
    cfg.validate();
    return cfg;
}

json PGConfig::to_json() const {
    return {{"seed", seed},
            {"num_blocks", num_blocks},
            {"straight_weight", straight_weight},
            {"curve_weight", curve_weight},
            {"intersection_weight", intersection_weight},
            {"traffic_density", traffic_density},
            {"duration_s", duration_s},
            {"dt", dt},
            {"lanes_per_road", lanes_per_road},
            {"construction_prob", construction_prob},
            {"lane_width", lane_width},
            {"straight_length_min", straight_length_min},
            {"straight_length_max", straight_length_max},
            {"curve_radius_min", curve_radius_min},
            {"curve_radius_max", curve_radius_max},
            {"curve_angle_min_deg", curve_angle_min_deg},
            {"curve_angle_max_deg", curve_angle_max_deg},
            {"arm_length", arm_length},
            {"speed_limit_min", speed_limit_min},
            {"speed_limit_max", speed_limit_max}};
}

std::string pg_scenario_id(std::uint64_t seed) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "pg_%06llu", static_cast<unsigned long long>(seed));
    return buf;
}

// ---------------------------------------------------------------------------
// Map generation
// ---------------------------------------------------------------------------

namespace {

struct SpineSample {
    Vec2 pos;
    double heading = 0.0;
};

Vec2 right_normal(double heading) {
    return {std::sin(heading), -std::cos(heading)};
}

Vec2 offset_point(const SpineSample& s, double right_offset) {
    return s.pos + right_normal(s.heading) * right_offset;
}

/// One road piece: lanes and border lines derived from shared spine samples.
/// Lateral offsets are measured from the road center, to the right.
struct RoadPiece {
    std::vector<SpineSample> spine;
    std::string id_prefix;
};

double piece_offset(int lane_index, int lanes, double width) {
    return (lane_index + 0.5 - lanes / 2.0) * width;
}

std::vector<Vec3> offset_polyline(const RoadPiece& piece, double right_offset) {
    std::vector<Vec3> out;
    out.reserve(piece.spine.size());
    for (const SpineSample& s : piece.spine) {
        Vec2 p = offset_point(s, right_offset);
        out.push_back({p.x, p.y, 0.0});
    }
    return out;
}

std::vector<Vec2> lane_ring(const RoadPiece& piece, double left_edge, double right_edge) {
    std::vector<Vec2> ring;
    ring.reserve(piece.spine.size() * 2);
    for (const SpineSample& s : piece.spine) {
        ring.push_back(offset_point(s, left_edge));
    }
    for (auto it = piece.spine.rbegin(); it != piece.spine.rend(); ++it) {
        ring.push_back(offset_point(*it, right_edge));
    }
    return ring;
}

/// Emits the lanes and border lines of one piece into the feature table.
/// Returns the per-lateral-index lane ids.
std::vector<std::string> emit_piece(const RoadPiece& piece, int lanes, double width,
                                    double speed_limit, MapFeatures& features) {
    std::vector<std::string> lane_ids;
    for (int j = 0; j < lanes; ++j) {
        Lane lane;
        lane.id = piece.id_prefix + "_l" + std::to_string(j);
        double center = piece_offset(j, lanes, width);
        lane.centerline = offset_polyline(piece, center);
        lane.polygon = lane_ring(piece, center - width / 2.0, center + width / 2.0);
        lane.speed_limit = speed_limit;
        lane_ids.push_back(lane.id);
        features.emplace(lane.id, std::move(lane));
    }
    for (int j = 0; j <= lanes; ++j) {
        LaneLine line;
        line.id = piece.id_prefix + "_e" + std::to_string(j);
        line.polyline = offset_polyline(piece, (j - lanes / 2.0) * width);
        line.type = (j == 0 || j == lanes) ? LineType::RoadEdge : LineType::Broken;
        features.emplace(line.id, std::move(line));
    }
    // neighbor links within the piece
    for (int j = 0; j < lanes; ++j) {
        Lane& lane = std::get<Lane>(features.at(lane_ids[j]));
        if (j > 0) {
            lane.left_neighbors.push_back(lane_ids[j - 1]);
        }
        if (j + 1 < lanes) {
            lane.right_neighbors.push_back(lane_ids[j + 1]);
        }
    }
    return lane_ids;
}

void append_spine_straight(std::vector<SpineSample>& spine, SpineSample& cursor, double length,
                           double step = 10.0) {
    Vec2 dir{std::cos(cursor.heading), std::sin(cursor.heading)};
    int n = std::max(1, static_cast<int>(std::ceil(length / step)));
    for (int i = 1; i <= n; ++i) {
        double d = length * i / n;
        spine.push_back({cursor.pos + dir * d, cursor.heading});
    }
    cursor = spine.back();
}

void append_spine_arc(std::vector<SpineSample>& spine, SpineSample& cursor, double radius,
                      double angle, int turn_dir) {
    Vec2 to_center = Vec2{std::cos(cursor.heading), std::sin(cursor.heading)}.perp() *
                     (turn_dir > 0 ? radius : -radius);
    Vec2 center = cursor.pos + to_center;
    double phi0 = std::atan2(cursor.pos.y - center.y, cursor.pos.x - center.x);
    int n = std::max(2, static_cast<int>(std::ceil(angle / (2.0 * kPi / 180.0))));
    for (int i = 1; i <= n; ++i) {
        double swept = angle * i / n;
        double phi = phi0 + (turn_dir > 0 ? swept : -swept);
        Vec2 p = center + Vec2{std::cos(phi), std::sin(phi)} * radius;
        spine.push_back({p, wrap_angle(cursor.heading + (turn_dir > 0 ? swept : -swept))});
    }
    cursor = spine.back();
}

enum class BlockKind { Straight, Curve, Intersection };

}  // namespace

double PgMap::total_lane_length() const {
    double total = 0.0;
    for (const PgChain& chain : chains) {
        total += chain.centerline.length();
    }
    return total;
}

std::optional<std::size_t> PgMap::adjacent_chain(std::size_t chain, int direction) const {
    if (chain >= chains.size()) {
        return std::nullopt;
    }
    int want = chains[chain].lateral_index + direction;
    for (std::size_t i = 0; i < chains.size(); ++i) {
        if (chains[i].road == chains[chain].road && chains[i].lateral_index == want) {
            return i;
        }
    }
    return std::nullopt;
}

PgMap generate_map(const PGConfig& cfg) {
    cfg.validate();
    DetRng rng(cfg.seed ^ kMapStream);
    PgMap map;
    map.speed_limit = rng.uniform(cfg.speed_limit_min, cfg.speed_limit_max);

    const int lanes = cfg.lanes_per_road;
    const double w = cfg.lane_width;

    SpineSample cursor{{0.0, 0.0}, 0.0};
    std::vector<std::vector<std::string>> main_chain_ids(static_cast<std::size_t>(lanes));
    std::vector<std::vector<Vec2>> main_chain_pts(static_cast<std::size_t>(lanes));
    int arm_count = 0;

    auto accumulate_chain = [&](int j, const Lane& lane) {
        auto& pts = main_chain_pts[static_cast<std::size_t>(j)];
        for (const Vec3& p : lane.centerline) {
            if (pts.empty() || (pts.back() - p.xy()).norm2() > 0.0) {
                pts.push_back(p.xy());
            }
        }
    };

    for (int b = 0; b < cfg.num_blocks; ++b) {
        double total_w = cfg.straight_weight + cfg.curve_weight + cfg.intersection_weight;
        double draw = rng.next_double() * total_w;
        BlockKind kind = draw < cfg.straight_weight            ? BlockKind::Straight
                         : draw < cfg.straight_weight + cfg.curve_weight ? BlockKind::Curve
                                                               : BlockKind::Intersection;
        char prefix[16];
        std::snprintf(prefix, sizeof(prefix), "b%02d", b);
        RoadPiece piece;
        piece.id_prefix = prefix;
        piece.spine.push_back(cursor);

        std::vector<RoadPiece> arms;
        switch (kind) {
            case BlockKind::Straight: {
                double length = rng.uniform(cfg.straight_length_min, cfg.straight_length_max);
                append_spine_straight(piece.spine, cursor, length);
                break;
            }
            case BlockKind::Curve: {
                double radius = rng.uniform(cfg.curve_radius_min, cfg.curve_radius_max);
                double angle =
                    rng.uniform(cfg.curve_angle_min_deg, cfg.curve_angle_max_deg) * kPi / 180.0;
                int turn_dir = rng.next_below(2) == 0 ? 1 : -1;
                // keep the inner lane radius positive
                radius = std::max(radius, lanes * w + 5.0);
                append_spine_arc(piece.spine, cursor, radius, angle, turn_dir);
                break;
            }
            case BlockKind::Intersection: {
                ++map.intersection_blocks;
                const double approach = 20.0;
                const double box = lanes * w + 2.0;
                append_spine_straight(piece.spine, cursor, approach);
                SpineSample box_entry = cursor;
                append_spine_straight(piece.spine, cursor, box);
                append_spine_straight(piece.spine, cursor, approach);
                // one or two outbound arms at the box center
                Vec2 box_center =
                    box_entry.pos + Vec2{std::cos(box_entry.heading), std::sin(box_entry.heading)} *
                                        (box / 2.0);
                int arms_here = rng.next_below(2) == 0 ? 1 : 2;
                bool first_right = rng.next_below(2) == 0;
                for (int a = 0; a < arms_here; ++a) {
                    bool right = (a == 0) == first_right;
                    double arm_heading =
                        wrap_angle(box_entry.heading + (right ? -kPi / 2.0 : kPi / 2.0));
                    RoadPiece arm;
                    char arm_prefix[24];
                    std::snprintf(arm_prefix, sizeof(arm_prefix), "b%02d_a%d", b, a);
                    arm.id_prefix = arm_prefix;
                    SpineSample arm_cursor{
                        box_center + Vec2{std::cos(arm_heading), std::sin(arm_heading)} *
                                         (lanes * w / 2.0 + 1.0),
                        arm_heading};
                    arm.spine.push_back(arm_cursor);
                    append_spine_straight(arm.spine, arm_cursor, cfg.arm_length);
                    arms.push_back(std::move(arm));
                }
                break;
            }
        }

        std::vector<std::string> ids = emit_piece(piece, lanes, w, map.speed_limit, map.features);
        for (int j = 0; j < lanes; ++j) {
            // chain the block to the previous one
            if (!main_chain_ids[static_cast<std::size_t>(j)].empty()) {
                const std::string& prev = main_chain_ids[static_cast<std::size_t>(j)].back();
                std::get<Lane>(map.features.at(prev)).exit_lanes.push_back(ids[j]);
                std::get<Lane>(map.features.at(ids[j])).entry_lanes.push_back(prev);
            }
            main_chain_ids[static_cast<std::size_t>(j)].push_back(ids[j]);
            accumulate_chain(j, std::get<Lane>(map.features.at(ids[j])));
        }

        for (RoadPiece& arm : arms) {
            ++arm_count;
            std::vector<std::string> arm_ids =
                emit_piece(arm, lanes, w, map.speed_limit, map.features);
            for (int j = 0; j < lanes; ++j) {
                PgChain chain;
                chain.lane_ids = {arm_ids[j]};
                std::vector<Vec2> pts;
                for (const Vec3& p : std::get<Lane>(map.features.at(arm_ids[j])).centerline) {
                    pts.push_back(p.xy());
                }
                chain.centerline = Polyline2(std::move(pts));
                chain.road = arm_count;
                chain.lateral_index = j;
                map.chains.push_back(std::move(chain));
            }
        }
    }

    // main-road chains go first, ordered left to right
    std::vector<PgChain> ordered;
    for (int j = 0; j < lanes; ++j) {
        PgChain chain;
        chain.lane_ids = main_chain_ids[static_cast<std::size_t>(j)];
        chain.centerline = Polyline2(std::move(main_chain_pts[static_cast<std::size_t>(j)]));
        chain.road = 0;
        chain.lateral_index = j;
        ordered.push_back(std::move(chain));
    }
    ordered.insert(ordered.end(), std::make_move_iterator(map.chains.begin()),
                   std::make_move_iterator(map.chains.end()));
    map.chains = std::move(ordered);
    return map;
}

// ---------------------------------------------------------------------------
// Traffic placement
// ---------------------------------------------------------------------------

TrafficPlan spawn_traffic(const PgMap& map, const PGConfig& cfg) {
    cfg.validate();
    DetRng rng(cfg.seed ^ kTrafficStream);
    TrafficPlan plan;
    const double total = map.total_lane_length();
    plan.requested = static_cast<int>(std::round(cfg.traffic_density * total / 100.0));

    // construction cluster first so placement can avoid it
    if (cfg.construction_prob > 0.0 && rng.next_double() < cfg.construction_prob &&
        !map.chains.empty()) {
        std::size_t chain = static_cast<std::size_t>(rng.next_below(map.chains.size()));
        double len = map.chains[chain].centerline.length();
        if (len > 40.0) {
            double center = rng.uniform(0.35, 0.65) * len;
            bool cones = rng.next_double() < 0.7;
            int count = cones ? 6 : 3;
            double spacing = cones ? 2.0 : 4.0;
            for (int i = 0; i < count; ++i) {
                StaticObstacle obstacle;
                obstacle.type = cones ? ObjectType::Cone : ObjectType::Barrier;
                obstacle.chain = chain;
                obstacle.s = center + (i - (count - 1) / 2.0) * spacing;
                if (!cones) {
                    obstacle.length = 1.5;
                    obstacle.width = 0.4;
                    obstacle.height = 0.8;
                }
                plan.obstacles.push_back(obstacle);
            }
        }
    }

    const double mean_spacing = cfg.traffic_density > 0.0 ? 100.0 / cfg.traffic_density : 1e9;
    int remaining = plan.requested;
    for (std::size_t c = 0; c < map.chains.size() && remaining > 0; ++c) {
        const double len = map.chains[c].centerline.length();
        // keep the stretch a free-flowing leader can cover clear of spawns
        const double spawn_end =
            std::max(len * 0.4, len - map.speed_limit * cfg.duration_s * 0.8);
        double occupied_lo = 1e18, occupied_hi = -1e18;
        for (const StaticObstacle& obstacle : plan.obstacles) {
            if (obstacle.chain == c) {
                occupied_lo = std::min(occupied_lo, obstacle.s - obstacle.length / 2.0 - 3.0);
                occupied_hi = std::max(occupied_hi, obstacle.s + obstacle.length / 2.0 + 3.0);
            }
        }
        double s = rng.uniform(0.0, 4.0);
        while (remaining > 0) {
            SpawnedVehicle v;
            v.length = rng.uniform(4.2, 4.9);
            v.width = rng.uniform(1.7, 1.9);
            v.height = rng.uniform(1.4, 1.6);
            double front = s + v.length;
            if (front > spawn_end) {
                break;
            }
            if (!(front < occupied_lo || s > occupied_hi)) {
                s = occupied_hi + 0.5;  // skip the construction stretch
                continue;
            }
            v.chain = c;
            v.s = s + v.length / 2.0;
            plan.vehicles.push_back(v);
            --remaining;
            double slack = std::max(mean_spacing - v.length - 2.0, 0.0);
            s = front + 2.0 + rng.uniform(0.0, 2.0 * slack);
        }
    }

    // one guaranteed vehicle so even zero-density scenarios have an sdc
    if (plan.vehicles.empty() && !map.chains.empty()) {
        SpawnedVehicle v;
        v.chain = 0;
        v.s = std::min(4.0, map.chains[0].centerline.length() / 2.0);
        plan.vehicles.push_back(v);
    }

    // equilibrium speeds per chain, front to back
    IdmParams idm;
    for (std::size_t c = 0; c < map.chains.size(); ++c) {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < plan.vehicles.size(); ++i) {
            if (plan.vehicles[i].chain == c) {
                order.push_back(i);
            }
        }
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return plan.vehicles[a].s < plan.vehicles[b].s; });
        for (std::size_t k = 0; k < order.size(); ++k) {
            SpawnedVehicle& v = plan.vehicles[order[k]];
            std::optional<double> gap;
            if (k + 1 < order.size()) {
                const SpawnedVehicle& lead = plan.vehicles[order[k + 1]];
                gap = lead.s - v.s - (lead.length + v.length) / 2.0;
            }
            for (const StaticObstacle& obstacle : plan.obstacles) {
                if (obstacle.chain == c && obstacle.s > v.s) {
                    double og = obstacle.s - v.s - (obstacle.length + v.length) / 2.0;
                    if (!gap || og < *gap) {
                        gap = og;
                    }
                }
            }
            v.speed = idm_equilibrium_speed(idm, map.speed_limit, gap);
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Rollout
// ---------------------------------------------------------------------------

namespace {

struct VehState {
    bool alive = true;
    std::size_t chain = 0;
    double s = 0.0;
    // lane change: blend > 0 means still partly on old_chain
    std::size_t old_chain = 0;
    double old_s = 0.0;
    double blend = 0.0;
    double v = 0.0;
    double static_time = 0.0;
    Vec2 pos;
    double heading = 0.0;
};

struct ChainLeader {
    double gap;
    double dv;
};

/// Nearest blocker ahead of (chain, s): vehicles occupying the chain
/// (including ones mid-blend) and static obstacles.
std::optional<ChainLeader> find_leader(const TrafficPlan& plan,
                                       const std::vector<VehState>& states, std::size_t self,
                                       std::size_t chain, double s) {
    const VehState& me = states[self];
    const double self_len = plan.vehicles[self].length;
    std::optional<ChainLeader> best;
    double best_ds = 60.0;
    auto consider = [&](double other_s, double other_len, double other_v) {
        double ds = other_s - s;
        if (ds <= 0.0 || ds >= best_ds) {
            return;
        }
        best_ds = ds;
        best = ChainLeader{std::max(ds - (self_len + other_len) / 2.0, 0.01), me.v - other_v};
    };
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (i == self || !states[i].alive) {
            continue;
        }
        const VehState& other = states[i];
        if (other.chain == chain) {
            consider(other.s, plan.vehicles[i].length, other.v);
        }
        if (other.blend > 0.0 && other.old_chain == chain) {
            consider(other.old_s, plan.vehicles[i].length, other.v);
        }
    }
    for (const StaticObstacle& obstacle : plan.obstacles) {
        if (obstacle.chain == chain) {
            consider(obstacle.s, obstacle.length, 0.0);
        }
    }
    return best;
}

bool window_free(const TrafficPlan& plan, const std::vector<VehState>& states,
                 std::size_t self, std::size_t chain, double s) {
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (i == self || !states[i].alive) {
            continue;
        }
        const VehState& other = states[i];
        double other_s;
        if (other.chain == chain) {
            other_s = other.s;
        } else if (other.blend > 0.0 && other.old_chain == chain) {
            other_s = other.old_s;
        } else {
            continue;
        }
        if (other_s > s - kFreeBehind && other_s < s + kFreeAhead) {
            return false;
        }
    }
    for (const StaticObstacle& obstacle : plan.obstacles) {
        if (obstacle.chain == chain && obstacle.s > s - kFreeBehind && obstacle.s < s + kFreeAhead) {
            return false;
        }
    }
    return true;
}

}  // namespace

ScenarioDescription roll_out(const PgMap& map, const TrafficPlan& plan, const PGConfig& cfg) {
    cfg.validate();
    const int n_frames = static_cast<int>(std::round(cfg.duration_s / cfg.dt));
    const double dt = cfg.dt;
    IdmParams idm;

    std::vector<VehState> states(plan.vehicles.size());
    for (std::size_t i = 0; i < plan.vehicles.size(); ++i) {
        const SpawnedVehicle& v = plan.vehicles[i];
        VehState& st = states[i];
        st.chain = v.chain;
        st.s = v.s;
        st.v = v.speed;
        st.pos = map.chains[v.chain].centerline.point_at(v.s);
        st.heading = map.chains[v.chain].centerline.heading_at(v.s);
    }

    // recorded tracks, zero-padded where a vehicle has left the map
    std::vector<ObjectTrack> tracks(plan.vehicles.size());
    for (std::size_t i = 0; i < plan.vehicles.size(); ++i) {
        ObjectTrack& t = tracks[i];
        t.type = ObjectType::Vehicle;
        t.length = plan.vehicles[i].length;
        t.width = plan.vehicles[i].width;
        t.height = plan.vehicles[i].height;
        t.position.assign(static_cast<std::size_t>(n_frames), Vec3{});
        t.heading.assign(static_cast<std::size_t>(n_frames), 0.0);
        t.velocity.assign(static_cast<std::size_t>(n_frames), Vec2{});
        t.valid.assign(static_cast<std::size_t>(n_frames), false);
    }

    auto record = [&](int frame) {
        for (std::size_t i = 0; i < states.size(); ++i) {
            const VehState& st = states[i];
            if (!st.alive) {
                continue;
            }
            ObjectTrack& t = tracks[i];
            auto f = static_cast<std::size_t>(frame);
            t.position[f] = {st.pos.x, st.pos.y, 0.0};
            t.heading[f] = wrap_angle(st.heading);
            Vec2 dir{std::cos(st.heading), std::sin(st.heading)};
            t.velocity[f] = dir * st.v;
            t.valid[f] = true;
        }
    };
    record(0);

    for (int frame = 1; frame < n_frames; ++frame) {
        for (std::size_t i = 0; i < states.size(); ++i) {
            VehState& st = states[i];
            if (!st.alive) {
                continue;
            }
            // worst leader across the lanes the vehicle currently occupies
            std::optional<ChainLeader> leader = find_leader(plan, states, i, st.chain, st.s);
            if (st.blend > 0.0) {
                auto other = find_leader(plan, states, i, st.old_chain, st.old_s);
                if (other && (!leader || other->gap < leader->gap)) {
                    leader = other;
                }
            }
            std::optional<LeaderInfo> info;
            if (leader) {
                info = LeaderInfo{leader->gap, leader->dv};
            }
            double accel = idm_acceleration(idm, st.v, map.speed_limit, info);
            st.v = std::max(0.0, st.v + accel * dt);

            // lane change away from a long-static leader
            bool leader_static = leader && leader->gap < kStaticLeaderGap &&
                                 st.v - leader->dv < kStaticLeaderSpeed;
            st.static_time = leader_static ? st.static_time + dt : 0.0;
            if (st.static_time > kStaticLeaderPatience && st.blend == 0.0) {
                for (int direction : {-1, 1}) {
                    auto target = map.adjacent_chain(st.chain, direction);
                    if (!target) {
                        continue;
                    }
                    double target_s = map.chains[*target].centerline.project(st.pos).s;
                    if (!window_free(plan, states, i, *target, target_s)) {
                        continue;
                    }
                    st.old_chain = st.chain;
                    st.old_s = st.s;
                    st.chain = *target;
                    st.s = target_s;
                    st.blend = 1.0;
                    st.static_time = 0.0;
                    break;
                }
            }

            st.s += st.v * dt;
            if (st.blend > 0.0) {
                st.old_s += st.v * dt;
                st.blend = std::max(0.0, st.blend - dt / kLaneChangeDuration);
                if (st.old_s > map.chains[st.old_chain].centerline.length()) {
                    st.blend = 0.0;
                }
            }
            if (st.s > map.chains[st.chain].centerline.length()) {
                st.alive = false;  // left the map
                continue;
            }
            Vec2 target_pos = map.chains[st.chain].centerline.point_at(st.s);
            Vec2 new_pos = target_pos;
            if (st.blend > 0.0) {
                Vec2 old_pos = map.chains[st.old_chain].centerline.point_at(st.old_s);
                new_pos = old_pos * st.blend + target_pos * (1.0 - st.blend);
            }
            if ((new_pos - st.pos).norm() > 1e-6) {
                Vec2 d = new_pos - st.pos;
                st.heading = std::atan2(d.y, d.x);
            }
            st.pos = new_pos;
        }
        record(frame);
    }

    // static obstacles become constant tracks
    ScenarioDescription desc;
    desc.scenario_id = pg_scenario_id(cfg.seed);
    desc.map_features = map.features;
    char name[32];
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        std::snprintf(name, sizeof(name), "v%03zu", i);
        desc.tracks.emplace(name, std::move(tracks[i]));
    }
    for (std::size_t i = 0; i < plan.obstacles.size(); ++i) {
        const StaticObstacle& obstacle = plan.obstacles[i];
        const Polyline2& line = map.chains[obstacle.chain].centerline;
        Vec2 p = line.point_at(obstacle.s);
        double heading = line.heading_at(obstacle.s);
        ObjectTrack t;
        t.type = obstacle.type;
        t.length = obstacle.length;
        t.width = obstacle.width;
        t.height = obstacle.height;
        t.position.assign(static_cast<std::size_t>(n_frames), {p.x, p.y, 0.0});
        t.heading.assign(static_cast<std::size_t>(n_frames), wrap_angle(heading));
        t.velocity.assign(static_cast<std::size_t>(n_frames), Vec2{});
        t.valid.assign(static_cast<std::size_t>(n_frames), true);
        std::snprintf(name, sizeof(name), "o%03zu", i);
        desc.tracks.emplace(name, std::move(t));
    }

    // the vehicle that went farthest is the self-driving car
    std::string sdc;
    double best = -1.0;
    for (const auto& [id, track] : desc.tracks) {
        if (track.type != ObjectType::Vehicle) {
            continue;
        }
        double dist = track.moving_distance();
        if (dist > best) {
            best = dist;
            sdc = id;
        }
    }

    desc.metadata.source = "pg";
    desc.metadata.dt = dt;
    desc.metadata.episode_length = n_frames;
    desc.metadata.sdc_id = sdc;
    desc.metadata.extras["pg_seed"] = static_cast<double>(cfg.seed);
    desc.metadata.extras["pg_num_blocks"] = cfg.num_blocks;
    desc.metadata.extras["pg_intersection_blocks"] = map.intersection_blocks;
    desc.refresh_statistics();
    if (!sdc.empty()) {
        try {
            desc.metadata.difficulty = difficulty_score(desc.tracks.at(sdc));
        } catch (const std::exception&) {
        }
    }
    return desc;
}

ScenarioDescription generate_scenario(const PGConfig& cfg) {
    PgMap map = generate_map(cfg);
    TrafficPlan plan = spawn_traffic(map, cfg);
    return roll_out(map, plan, cfg);
}

}  // namespace scensim
