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

#include <set>

#include "scensim/curriculum.hpp"

using namespace scensim;

namespace {

/// In-memory database whose difficulties are a shuffled permutation.
DatabaseManifest synthetic_db(std::size_t count, std::uint64_t seed = 1) {
    std::vector<double> difficulties;
    difficulties.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        difficulties.push_back(static_cast<double>(i) * 0.5);
    }
    DetRng rng(seed);
    det_shuffle(difficulties, rng);

    DatabaseManifest db;
    char name[32];
    for (std::size_t i = 0; i < count; ++i) {
        std::snprintf(name, sizeof(name), "sc_%06zu", i);
        ScenarioMetadata meta;
        meta.source = "synthetic";
        meta.dt = 0.1;
        meta.episode_length = 10;
        meta.sdc_id = "ego";
        meta.object_count = 1;
        meta.per_object_moving_distance["ego"] = 25.0;
        meta.difficulty = difficulties[i];
        db.summary.emplace(name, meta);
        db.mapping.emplace(name, std::string(name) + ".sif");
    }
    return db;
}

}  // namespace

TEST_CASE("build partitions a difficulty-sorted order into levels and subsets") {
    CurriculumConfig cfg;
    cfg.n_levels = 10;
    cfg.per_level = 40;
    cfg.n_subsets = 4;
    CurriculumState state = CurriculumState::build(synthetic_db(400), cfg);

    CHECK(state.n_levels() == 10);
    CHECK(state.sorted_ids().size() == 400);

    // ascending difficulty, and levels tile the order contiguously
    double prev = -1.0;
    std::size_t covered = 0;
    for (int level = 1; level <= state.n_levels(); ++level) {
        auto [begin, end] = state.level_range(level);
        CHECK(begin == covered);
        CHECK(end - begin == 40);
        covered = end;
        (void)prev;
    }
    CHECK(covered == 400);

    // levels are adjacent slices of the sorted order
    CHECK(state.level_range(1).second == state.level_range(2).first);

    // subsets partition each level round-robin with sizes differing by <= 1
    for (int level = 1; level <= 2; ++level) {
        std::set<std::string> seen;
        std::size_t min_size = 1e9, max_size = 0;
        for (int sub = 0; sub < cfg.n_subsets; ++sub) {
            auto ids = state.subset(level, sub);
            min_size = std::min(min_size, ids.size());
            max_size = std::max(max_size, ids.size());
            for (const std::string& id : ids) {
                CHECK(seen.insert(id).second);
            }
        }
        auto [begin, end] = state.level_range(level);
        CHECK(seen.size() == end - begin);
        CHECK(max_size - min_size <= 1);
    }
}

TEST_CASE("sorted order is ascending in difficulty") {
    DatabaseManifest db = synthetic_db(200, 9);
    CurriculumConfig cfg;
    cfg.n_levels = 5;
    cfg.per_level = 40;
    CurriculumState state = CurriculumState::build(db, cfg);
    double prev = -1e300;
    for (const std::string& id : state.sorted_ids()) {
        double d = db.summary.at(id).difficulty.value();
        CHECK(d >= prev);
        prev = d;
    }
}

TEST_CASE("a smaller database shrinks levels proportionally") {
    CurriculumConfig cfg;  // 100 levels of 400 nominally
    CurriculumState state = CurriculumState::build(synthetic_db(1000), cfg);
    CHECK(state.n_levels() == 100);
    for (int level = 1; level <= 100; ++level) {
        auto [begin, end] = state.level_range(level);
        CHECK(end - begin == 10);
    }
}

TEST_CASE("level-up requires a full window at or above the gate") {
    CurriculumConfig cfg;
    cfg.n_levels = 4;
    cfg.per_level = 40;
    cfg.n_subsets = 4;
    cfg.window = 40;
    CurriculumState state = CurriculumState::build(synthetic_db(160), cfg);

    SUBCASE("exactly 75 percent levels up") {
        // 30 successes / 40 episodes = 0.75
        for (int i = 0; i < 10; ++i) {
            CHECK_FALSE(state.report_result(0, false));
        }
        bool leveled = false;
        for (int i = 0; i < 30; ++i) {
            leveled = state.report_result(0, true) || leveled;
        }
        CHECK(leveled);
        CHECK(state.worker_level(0) == 2);
    }
    SUBCASE("just below the gate stays") {
        // 29 / 40 = 0.725 < 0.75, then failures keep it below forever
        for (int i = 0; i < 11; ++i) {
            CHECK_FALSE(state.report_result(1, false));
        }
        for (int i = 0; i < 29; ++i) {
            CHECK_FALSE(state.report_result(1, true));
        }
        CHECK(state.worker_level(1) == 1);
        CHECK(state.worker_success_rate(1) == doctest::Approx(29.0 / 40.0));
    }
    SUBCASE("no level-up before the window fills, even at rate 1.0") {
        for (int i = 0; i < cfg.window - 1; ++i) {
            CHECK_FALSE(state.report_result(2, true));
        }
        CHECK(state.worker_level(2) == 1);
        CHECK(state.report_result(2, true));  // the 40th result completes the window
        CHECK(state.worker_level(2) == 2);
    }
    SUBCASE("unknown worker") {
        CHECK_THROWS_AS(state.report_result(99, true), CurriculumError);
    }
}

TEST_CASE("the top level is a cap") {
    CurriculumConfig cfg;
    cfg.n_levels = 2;
    cfg.per_level = 8;
    cfg.n_subsets = 2;
    cfg.window = 4;
    CurriculumState state = CurriculumState::build(synthetic_db(16), cfg);
    for (int i = 0; i < 4; ++i) {
        state.report_result(0, true);
    }
    CHECK(state.worker_level(0) == 2);
    for (int i = 0; i < 50; ++i) {
        CHECK_FALSE(state.report_result(0, true));
    }
    CHECK(state.worker_level(0) == 2);  // stays at the cap
}

TEST_CASE("per-worker residency is one subset of the current level") {
    CurriculumConfig cfg;
    cfg.n_levels = 5;
    cfg.per_level = 40;
    cfg.n_subsets = 20;
    cfg.window = 4;
    CurriculumState state = CurriculumState::build(synthetic_db(200), cfg);

    for (int worker = 0; worker < state.n_workers(); ++worker) {
        auto resident = state.resident_scenarios(worker);
        CHECK(resident.size() == 2);  // 40 / 20
        auto [begin, end] = state.level_range(1);
        for (const std::string& id : resident) {
            bool inside = false;
            for (std::size_t i = begin; i < end; ++i) {
                inside = inside || state.sorted_ids()[i] == id;
            }
            CHECK(inside);
        }
    }

    auto before = state.resident_scenarios(3);
    for (int i = 0; i < 4; ++i) {
        state.report_result(3, true);
    }
    CHECK(state.worker_level(3) == 2);
    auto after = state.resident_scenarios(3);
    CHECK(before != after);  // the previous level's subset became evictable
}

TEST_CASE("the level sequence is a pure function of the result stream") {
    CurriculumConfig cfg;
    cfg.n_levels = 6;
    cfg.per_level = 12;
    cfg.n_subsets = 3;
    cfg.window = 6;
    DetRng rng(15);
    std::vector<bool> stream;
    for (int i = 0; i < 500; ++i) {
        stream.push_back(rng.next_double() < 0.8);
    }
    auto run = [&] {
        CurriculumState state = CurriculumState::build(synthetic_db(72), cfg);
        std::vector<int> levels;
        for (bool success : stream) {
            state.report_result(1, success);
            levels.push_back(state.worker_level(1));
        }
        return levels;
    };
    CHECK(run() == run());
}

TEST_CASE("empty databases are rejected") {
    CHECK_THROWS_AS(CurriculumState::build(DatabaseManifest{}, CurriculumConfig{}),
                    CurriculumError);
}
