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

#include <cmath>

#include "helpers.hpp"
#include "scensim/map.hpp"

using namespace scensim;
using test::straight_lane;

namespace {

Lane quarter_circle_lane(double radius, double step_deg = 1.0) {
    Lane lane;
    lane.id = "arc";
    int n = static_cast<int>(90.0 / step_deg);
    for (int i = 0; i <= n; ++i) {
        double phi = (kPi / 2.0) * i / n;
        // start at (radius, 0) heading +y, curving left to (0, radius)... use
        // circle centered at origin from angle 0 to 90
        lane.centerline.push_back({radius * std::cos(phi), radius * std::sin(phi), 0.0});
    }
    for (int i = 0; i <= n; ++i) {
        double phi = (kPi / 2.0) * i / n;
        lane.polygon.push_back({(radius - 1.75) * std::cos(phi), (radius - 1.75) * std::sin(phi)});
    }
    for (int i = n; i >= 0; --i) {
        double phi = (kPi / 2.0) * i / n;
        lane.polygon.push_back({(radius + 1.75) * std::cos(phi), (radius + 1.75) * std::sin(phi)});
    }
    return lane;
}

// dense-sampling Frenet oracle: distance to many interpolated centerline points
std::pair<double, double> dense_frenet(const std::vector<Vec3>& centerline, Vec2 p, int samples) {
    Polyline2 line([&] {
        std::vector<Vec2> pts;
        for (const Vec3& q : centerline) {
            pts.push_back(q.xy());
        }
        return pts;
    }());
    double best_s = 0.0, best_d2 = 1e300;
    for (int i = 0; i <= samples; ++i) {
        double s = line.length() * i / samples;
        double d2 = (line.point_at(s) - p).norm2();
        if (d2 < best_d2) {
            best_d2 = d2;
            best_s = s;
        }
    }
    return {best_s, std::sqrt(best_d2)};
}

}  // namespace

TEST_CASE("frenet_project on a straight lane") {
    Lane lane = straight_lane("l", 100.0);
    FrenetCoord f = frenet_project(lane, {10.0, 2.0});
    CHECK(f.s == doctest::Approx(10.0));
    CHECK(f.d == doctest::Approx(2.0));
    f = frenet_project(lane, {-5.0, 0.0});
    CHECK(f.s == doctest::Approx(0.0));
    CHECK(f.d == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("frenet_project on a quarter circle matches the dense oracle") {
    Lane lane = quarter_circle_lane(10.0);
    // point at 45 degrees pushed 1 m radially outward
    Vec2 p{11.0 * std::cos(kPi / 4.0), 11.0 * std::sin(kPi / 4.0)};
    FrenetCoord f = frenet_project(lane, p);
    CHECK(std::abs(f.s - 10.0 * kPi / 4.0) < 2e-3);
    CHECK(std::abs(std::abs(f.d) - 1.0) < 2e-3);
    // d sign: traveling counter-clockwise, outward is to the right
    CHECK(f.d < 0.0);

    auto [os, od] = dense_frenet(lane.centerline, p, 100000);
    CHECK(std::abs(f.s - os) < 2e-3);
    CHECK(std::abs(std::abs(f.d) - od) < 2e-3);
}

TEST_CASE("point_on_lane uses the polygon, boundary inclusive") {
    Lane lane = straight_lane("l", 50.0);
    CHECK(point_on_lane(lane, {25.0, 0.0}));
    CHECK(point_on_lane(lane, {25.0, 1.75}));  // boundary
    CHECK_FALSE(point_on_lane(lane, {25.0, 1000.0}));
    CHECK_FALSE(point_on_lane(lane, {-1.0, 0.0}));
}

TEST_CASE("nearest_lane picks the smallest |d| with documented tie-break") {
    MapFeatures features;
    features.emplace("a", straight_lane("a", 100.0, 3.5, 0.0));
    features.emplace("b", straight_lane("b", 100.0, 3.5, 3.5));
    features.emplace("c", straight_lane("c", 100.0, 3.5, 50.0));
    MapIndex index(features);

    CHECK(index.nearest_lane({50.0, 0.1}) == "a");
    CHECK(index.nearest_lane({50.0, 3.4}) == "b");
    CHECK(index.nearest_lane({50.0, 49.0}) == "c");
    // equidistant between a and b: lexicographically smaller id wins
    CHECK(index.nearest_lane({50.0, 1.75}) == "a");

    CHECK_THROWS_AS(MapIndex(MapFeatures{}).nearest_lane({0, 0}), MapError);
}

TEST_CASE("nearest_lane agrees with an exhaustive scan on random maps") {
    DetRng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        MapFeatures features;
        int lanes = 3 + static_cast<int>(rng.next_below(5));
        for (int i = 0; i < lanes; ++i) {
            std::string id = "lane_" + std::to_string(i);
            features.emplace(id, straight_lane(id, rng.uniform(20.0, 200.0), 3.5,
                                               rng.uniform(-100.0, 100.0)));
        }
        MapIndex index(features);
        for (int q = 0; q < 50; ++q) {
            Vec2 p{rng.uniform(-150.0, 250.0), rng.uniform(-150.0, 150.0)};
            // exhaustive oracle with the same tie-break
            std::string best_id;
            FrenetCoord best{};
            for (const Lane& lane : index.lanes()) {
                FrenetCoord f = frenet_project(lane, p);
                if (best_id.empty() || std::abs(f.d) < std::abs(best.d) ||
                    (std::abs(f.d) == std::abs(best.d) &&
                     (f.s < best.s || (f.s == best.s && lane.id < best_id)))) {
                    best_id = lane.id;
                    best = f;
                }
            }
            CHECK(index.nearest_lane(p) == best_id);
        }
    }
}

TEST_CASE("nearest_lane is invariant under uniform translation") {
    MapFeatures features;
    features.emplace("a", straight_lane("a", 80.0, 3.5, 0.0));
    features.emplace("b", straight_lane("b", 80.0, 3.5, 7.0));
    MapIndex index(features);

    Vec2 shift{1234.5, -987.0};
    MapFeatures shifted;
    for (const auto& [id, feature] : features) {
        Lane lane = std::get<Lane>(feature);
        for (Vec3& p : lane.centerline) {
            p.x += shift.x;
            p.y += shift.y;
        }
        for (Vec2& p : lane.polygon) {
            p = p + shift;
        }
        shifted.emplace(id, lane);
    }
    MapIndex shifted_index(shifted);
    DetRng rng(5);
    for (int q = 0; q < 100; ++q) {
        Vec2 p{rng.uniform(-20.0, 100.0), rng.uniform(-20.0, 30.0)};
        CHECK(index.nearest_lane(p) == shifted_index.nearest_lane(p + shift));
    }
}

TEST_CASE("crosses_line detects proper crossings only") {
    LaneLine line;
    line.id = "edge";
    line.type = LineType::Solid;
    line.polyline = {{0.0, 5.0, 0.0}, {100.0, 5.0, 0.0}};

    CHECK(crosses_line({50.0, 0.0}, {50.0, 10.0}, line));   // straight through
    CHECK_FALSE(crosses_line({0.0, 0.0}, {100.0, 0.0}, line));  // parallel, apart
    CHECK_FALSE(crosses_line({50.0, 0.0}, {50.0, 4.9}, line));  // stops short

    // randomized agreement with brute-force pairwise checks on a wiggly line
    DetRng rng(31);
    LaneLine wiggly;
    wiggly.id = "w";
    std::vector<Vec2> pts{{0.0, 0.0}};
    double heading = 0.3;
    for (int i = 0; i < 15; ++i) {
        heading += rng.uniform(-0.5, 0.5);
        pts.push_back(pts.back() + Vec2{std::cos(heading), std::sin(heading)} * 4.0);
    }
    for (Vec2 p : pts) {
        wiggly.polyline.push_back({p.x, p.y, 0.0});
    }
    for (int q = 0; q < 500; ++q) {
        Vec2 a{rng.uniform(-10.0, 70.0), rng.uniform(-20.0, 20.0)};
        Vec2 b = a + Vec2{rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0)};
        bool oracle = false;
        for (std::size_t i = 0; i + 1 < wiggly.polyline.size(); ++i) {
            if (segments_intersect(a, b, wiggly.polyline[i].xy(), wiggly.polyline[i + 1].xy())) {
                oracle = true;
            }
        }
        CHECK(crosses_line(a, b, wiggly) == oracle);
    }
}

TEST_CASE("lane_successors and drivable area") {
    MapFeatures features;
    Lane a = straight_lane("a", 50.0);
    Lane b = straight_lane("b", 50.0);
    for (Vec3& p : b.centerline) {
        p.x += 50.0;
    }
    for (Vec2& p : b.polygon) {
        p.x += 50.0;
    }
    a.exit_lanes = {"b"};
    b.entry_lanes = {"a"};
    features.emplace("a", a);
    features.emplace("b", b);
    // a detached lane far away with a gap before it
    features.emplace("far", straight_lane("far", 20.0, 3.5, 100.0));
    MapIndex index(features);

    CHECK(index.lane_successors("a") == std::vector<std::string>{"b"});
    CHECK(index.lane_successors("b").empty());  // terminal lane
    CHECK_THROWS_AS(index.lane_successors("nope"), MapError);

    CHECK(index.in_drivable_area({25.0, 0.0}));
    CHECK(index.in_drivable_area({75.0, 1.0}));
    CHECK(index.in_drivable_area({10.0, 100.0}));
    // the gap between the road and the detached lane
    CHECK_FALSE(index.in_drivable_area({10.0, 50.0}));

    // polygon-union oracle on random points
    DetRng rng(41);
    for (int q = 0; q < 500; ++q) {
        Vec2 p{rng.uniform(-10.0, 110.0), rng.uniform(-10.0, 110.0)};
        bool oracle = false;
        for (const Lane& lane : index.lanes()) {
            oracle = oracle || point_in_polygon(lane.polygon, p);
        }
        CHECK(index.in_drivable_area(p) == oracle);
    }
}

TEST_CASE("grid registration covers every cell a lane overlaps") {
    MapFeatures features;
    features.emplace("long", straight_lane("long", 200.0));  // spans many cells
    features.emplace("off", straight_lane("off", 30.0, 3.5, 60.0));
    MapIndex index(features);
    // walking the polygon of each lane, the owning lane must always be
    // among the candidates of the covering cell
    DetRng rng(13);
    for (const Lane& lane : index.lanes()) {
        for (int q = 0; q < 200; ++q) {
            double x = rng.uniform(lane.polygon[0].x, lane.polygon[1].x);
            double y = rng.uniform(lane.polygon[0].y, lane.polygon[2].y);
            if (!point_in_polygon(lane.polygon, {x, y})) {
                continue;
            }
            auto candidates = index.candidates_near({x, y}, 0);
            bool found = false;
            for (std::size_t idx : candidates) {
                found = found || index.lanes()[idx].id == lane.id;
            }
            CHECK(found);
        }
    }
}

TEST_CASE("validate_map_features flags structural defects") {
    MapFeatures ok;
    ok.emplace("a", straight_lane("a", 50.0));
    CHECK(validate_map_features(ok).empty());

    MapFeatures bad;
    Lane lane = straight_lane("a", 50.0);
    lane.exit_lanes = {"ghost"};
    bad.emplace("a", lane);
    auto issues = validate_map_features(bad);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].what.find("ghost") != std::string::npos);

    MapFeatures bowtie;
    Lane twisted = straight_lane("t", 10.0);
    std::swap(twisted.polygon[2], twisted.polygon[3]);
    bowtie.emplace("t", twisted);
    CHECK_FALSE(validate_map_features(bowtie).empty());
}
