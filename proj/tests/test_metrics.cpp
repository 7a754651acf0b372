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
#include "scensim/metrics.hpp"

using namespace scensim;

TEST_CASE("displacement reward is the longitudinal Frenet difference") {
    Polyline2 reference({{0.0, 0.0}, {100.0, 0.0}});
    CHECK(displacement_reward(reference, {10.0, 1.0}, {10.0, 1.0}) == doctest::Approx(0.0));
    CHECK(displacement_reward(reference, {10.0, 0.5}, {11.0, 0.5}) == doctest::Approx(1.0));
    CHECK(displacement_reward(reference, {11.0, 0.0}, {10.0, 0.0}) == doctest::Approx(-1.0));

    // curved reference vs a dense-sampling Frenet oracle
    std::vector<Vec2> arc;
    for (int i = 0; i <= 90; ++i) {
        double phi = kPi / 2.0 * i / 90.0;
        arc.push_back({30.0 * std::sin(phi), 30.0 * (1.0 - std::cos(phi))});
    }
    Polyline2 curved(arc);
    Vec2 a = curved.from_frenet({10.0, 0.4});
    Vec2 b = curved.from_frenet({17.5, -0.2});
    double expect = curved.project(b).s - curved.project(a).s;
    CHECK(displacement_reward(curved, a, b) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(expect == doctest::Approx(7.5).epsilon(1e-3));
}

TEST_CASE("smooth penalty formula") {
    CHECK(smooth_penalty(0.0, 0.9) == doctest::Approx(0.0));  // 1/v = +inf
    CHECK(smooth_penalty(10.0, 0.05) == doctest::Approx(0.0));  // min with zero
    CHECK(smooth_penalty(10.0, 0.5) == doctest::Approx(0.1 - 0.5));
    CHECK(smooth_penalty(10.0, -0.5) == doctest::Approx(-0.4));  // |steer|
}

TEST_CASE("step reward golden values, single-agent") {
    RewardConfig cfg = RewardConfig::single_agent();

    TransitionSummary still;  // mid-episode, stationary, no collision
    CHECK(step_reward(cfg, still) == doctest::Approx(0.0));

    TransitionSummary crash = still;
    crash.collision = CollisionClass::VehicleOrHuman;
    CHECK(step_reward(cfg, crash) == doctest::Approx(-2.0));
    crash.collision = CollisionClass::Object;
    CHECK(step_reward(cfg, crash) == doctest::Approx(-0.5));

    TransitionSummary success;
    success.displacement = 3.0;  // zeroed at the terminal step
    success.speed = 10.0;
    success.steer = 0.9;
    success.terminal = Termination::Success;
    CHECK(step_reward(cfg, success) == doctest::Approx(10.0));

    TransitionSummary off;
    off.terminal = Termination::OutOfRoute;
    CHECK(step_reward(cfg, off) == doctest::Approx(-5.0));

    TransitionSummary cruise;
    cruise.displacement = 1.2;
    cruise.speed = 12.0;
    cruise.steer = 0.4;
    double expect = 2.0 * 1.2 + std::min(0.0, 1.0 / 12.0 - 0.4);
    CHECK(step_reward(cfg, cruise) == doctest::Approx(expect).epsilon(1e-12));

    // zeroed coefficients reduce the reward to the terminal term
    RewardConfig bare = cfg;
    bare.c1 = bare.c2 = bare.c3 = 0.0;
    TransitionSummary messy;
    messy.displacement = 5.0;
    messy.speed = 3.0;
    messy.steer = 1.0;
    messy.collision = CollisionClass::VehicleOrHuman;
    messy.terminal = Termination::Success;
    CHECK(step_reward(bare, messy) == doctest::Approx(10.0));
}

TEST_CASE("step reward golden values, multi-agent") {
    RewardConfig cfg = RewardConfig::multi_agent();

    TransitionSummary move;
    move.displacement = 0.8;
    move.speed = 8.0;
    move.steer = 1.0;  // smoothness does not apply in multi-agent mode
    CHECK(step_reward(cfg, move) == doctest::Approx(0.8));

    TransitionSummary crash = move;
    crash.collision = CollisionClass::VehicleOrHuman;
    CHECK(step_reward(cfg, crash) == doctest::Approx(0.8 - 1.0));

    TransitionSummary out;
    out.terminal = Termination::OutOfRoad;
    CHECK(step_reward(cfg, out) == doctest::Approx(-1.0));

    TransitionSummary success;
    success.terminal = Termination::Success;
    CHECK(step_reward(cfg, success) == doctest::Approx(10.0));
}

TEST_CASE("route completion") {
    Polyline2 gt({{0.0, 0.0}, {100.0, 0.0}});
    std::vector<Vec2> same{{0.0, 0.0}, {50.0, 0.0}, {100.0, 0.0}};
    CHECK(route_completion(same, gt) == doctest::Approx(1.0));

    std::vector<Vec2> parked{{0.0, 0.0}, {0.0, 0.0}};
    CHECK(route_completion(parked, gt) == doctest::Approx(0.0));

    std::vector<Vec2> half{{0.0, 0.0}, {25.0, 0.0}, {50.0, 0.0}};
    CHECK(route_completion(half, gt) == doctest::Approx(0.5));

    // monotone: progress never decreases as the trajectory extends
    std::vector<Vec2> wander{{0.0, 0.0}, {40.0, 0.0}, {10.0, 0.0}, {20.0, 0.0}};
    double prev = 0.0;
    for (std::size_t t = 1; t <= wander.size(); ++t) {
        double rc = route_completion(std::span(wander.data(), t), gt);
        CHECK(rc >= prev);
        prev = rc;
    }
    CHECK(prev == doctest::Approx(0.4));

    CHECK_THROWS_AS(route_completion(same, Polyline2({{0.0, 0.0}})), std::invalid_argument);
}

TEST_CASE("average and final distance") {
    std::vector<Vec2> gt, agent;
    for (int t = 0; t < 200; ++t) {
        gt.push_back({1.0 * t, 0.0});
    }
    SUBCASE("identical trajectories") {
        agent = gt;
        CHECK(average_distance(agent, gt) == doctest::Approx(0.0));
        CHECK(final_distance(agent, gt) == doctest::Approx(0.0));
    }
    SUBCASE("constant lateral offset") {
        for (const Vec2& p : gt) {
            agent.push_back({p.x, 3.0});
        }
        CHECK(average_distance(agent, gt) == doctest::Approx(3.0));
        CHECK(final_distance(agent, gt) == doctest::Approx(3.0));
    }
    SUBCASE("short agent trajectory uses T = min length") {
        for (int t = 0; t < 10; ++t) {
            agent.push_back(gt[static_cast<std::size_t>(t)]);
        }
        CHECK(average_distance(agent, gt) == doctest::Approx(0.0));
        // final distance compares the two last positions
        CHECK(final_distance(agent, gt) == doctest::Approx((gt.back() - agent.back()).norm()));
        CHECK(final_distance(agent, gt) == doctest::Approx(190.0));
    }
    SUBCASE("random pairs match brute-force recomputation") {
        DetRng rng(3);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<Vec2> a, b;
            std::size_t na = 1 + rng.next_below(40);
            std::size_t nb = 1 + rng.next_below(40);
            for (std::size_t i = 0; i < na; ++i) {
                a.push_back({rng.uniform(-50, 50), rng.uniform(-50, 50)});
            }
            for (std::size_t i = 0; i < nb; ++i) {
                b.push_back({rng.uniform(-50, 50), rng.uniform(-50, 50)});
            }
            std::size_t t_max = std::min(na, nb);
            double sum = 0.0;
            for (std::size_t t = 0; t < t_max; ++t) {
                sum += std::hypot(a[t].x - b[t].x, a[t].y - b[t].y);
            }
            CHECK(average_distance(a, b) == doctest::Approx(sum / t_max).epsilon(1e-12));
            CHECK(final_distance(a, b) ==
                  doctest::Approx((a.back() - b.back()).norm()).epsilon(1e-12));
        }
    }
    SUBCASE("empty trajectories are errors") {
        CHECK_THROWS_AS(average_distance(std::span<const Vec2>{}, gt), std::invalid_argument);
        CHECK_THROWS_AS(final_distance(std::span<const Vec2>{}, gt), std::invalid_argument);
    }
}

namespace {

ObjectTrack arc_track(double radius, double sweep, int frames) {
    ObjectTrack t;
    t.type = ObjectType::Vehicle;
    t.length = 4.5;
    t.width = 1.8;
    t.height = 1.5;
    for (int i = 0; i < frames; ++i) {
        double phi = sweep * i / (frames - 1);
        t.position.push_back({radius * std::sin(phi), radius * (1.0 - std::cos(phi)), 0.0});
        t.heading.push_back(wrap_angle(phi));
        t.velocity.push_back({0.0, 0.0});
        t.valid.push_back(true);
    }
    return t;
}

}  // namespace

TEST_CASE("difficulty score = track length x cumulative curvature") {
    SUBCASE("straight constant-heading track scores zero") {
        ObjectTrack t = test::straight_track(50, 0.1, {0.0, 0.0}, 10.0);
        CHECK(difficulty_score(t) == doctest::Approx(0.0));
    }
    SUBCASE("quarter circle of radius 50") {
        ObjectTrack t = arc_track(50.0, kPi / 2.0, 2000);
        double expect = (50.0 * kPi / 2.0) * (kPi / 2.0);  // about 123.37
        CHECK(difficulty_score(t) == doctest::Approx(expect).epsilon(1e-4));
        CHECK(expect == doctest::Approx(123.37).epsilon(1e-3));
    }
    SUBCASE("doubling all positions doubles the score") {
        ObjectTrack t = arc_track(50.0, kPi / 2.0, 300);
        ObjectTrack scaled = t;
        for (Vec3& p : scaled.position) {
            p = {p.x * 2.0, p.y * 2.0, p.z};
        }
        CHECK(difficulty_score(scaled) == doctest::Approx(2.0 * difficulty_score(t)).epsilon(1e-9));
    }
    SUBCASE("rigid motion leaves the score unchanged") {
        ObjectTrack t = arc_track(30.0, 1.1, 300);
        ObjectTrack moved = t;
        double rot = 0.77;
        for (std::size_t i = 0; i < moved.position.size(); ++i) {
            Vec2 p = moved.position[i].xy().rotated(rot) + Vec2{120.0, -40.0};
            moved.position[i] = {p.x, p.y, 0.0};
            moved.heading[i] = wrap_angle(moved.heading[i] + rot);
        }
        CHECK(difficulty_score(moved) == doctest::Approx(difficulty_score(t)).epsilon(1e-9));
    }
    SUBCASE("invalid frames are skipped; fewer than two is an error") {
        ObjectTrack t = arc_track(30.0, 1.0, 100);
        for (std::size_t i = 0; i < t.valid.size(); ++i) {
            t.valid[i] = i < 2;
        }
        CHECK_NOTHROW(difficulty_score(t));
        t.valid.assign(t.valid.size(), false);
        CHECK_THROWS_AS(difficulty_score(t), std::invalid_argument);
    }
}

TEST_CASE("episode metrics aggregate a batch") {
    std::vector<EpisodeRecord> batch;
    auto add = [&](Termination outcome, double rc, double speed, int crashes) {
        EpisodeRecord r;
        r.outcome = outcome;
        r.route_completion = rc;
        r.mean_speed = speed;
        r.crashes = crashes;
        batch.push_back(r);
    };
    add(Termination::Success, 1.0, 10.0, 0);
    add(Termination::Success, 0.98, 8.0, 1);
    add(Termination::OutOfRoute, 0.3, 6.0, 0);
    add(Termination::Timeout, 0.5, 1.0, 2);

    MetricsSummary s = episode_metrics(batch);
    CHECK(s.episodes == 4);
    CHECK(s.success_rate == doctest::Approx(0.5));
    CHECK(s.out_of_road_rate == doctest::Approx(0.25));
    CHECK(s.timeout_rate == doctest::Approx(0.25));
    CHECK(s.success_rate + s.out_of_road_rate + s.timeout_rate == doctest::Approx(1.0));
    CHECK(s.mean_route_completion == doctest::Approx((1.0 + 0.98 + 0.3 + 0.5) / 4.0));
    CHECK(s.mean_speed == doctest::Approx(6.25));
    CHECK(s.mean_cost == doctest::Approx(0.75));

    CHECK_THROWS_AS(episode_metrics(std::span<const EpisodeRecord>{}), std::invalid_argument);

    std::vector<EpisodeRecord> wins(4);
    for (EpisodeRecord& r : wins) {
        r.outcome = Termination::Success;
    }
    CHECK(episode_metrics(wins).success_rate == doctest::Approx(1.0));
}
