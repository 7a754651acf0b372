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

#include <deque>

#include "scensim/database.hpp"

namespace scensim {

struct CurriculumError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CurriculumConfig {
    int n_levels = 100;
    int per_level = 400;   // shrunk proportionally if the database is smaller
    int n_subsets = 20;    // one per worker
    double success_gate = 0.75;
    int window = 40;       // level-up needs a full window at or above the gate
};

/// Difficulty-sorted levels with round-robin per-worker subsets. Workers
/// advance a level when their success rate over the most recent full window
/// reaches the gate; each worker only ever holds its current-level subset.
class CurriculumState {
public:
    /// Sorts by metadata difficulty ascending (ties by ego moving distance,
    /// then scenario id) and partitions contiguously into levels.
    static CurriculumState build(const DatabaseManifest& db, CurriculumConfig cfg = {});

    const CurriculumConfig& config() const { return cfg_; }
    int n_levels() const { return static_cast<int>(levels_.size()); }
    int n_workers() const { return cfg_.n_subsets; }
    const std::vector<std::string>& sorted_ids() const { return sorted_ids_; }

    /// [begin, end) of a 1-based level inside sorted_ids().
    std::pair<std::size_t, std::size_t> level_range(int level) const;

    /// Scenario ids of one subset of one level (round-robin within level).
    std::vector<std::string> subset(int level, int subset_index) const;

    int worker_level(int worker) const;

    /// Ids the worker currently needs in memory: its subset of its level.
    std::vector<std::string> resident_scenarios(int worker) const;

    /// Success rate over the most recent min(window, episodes) results.
    double worker_success_rate(int worker) const;

    /// Records one episode outcome. Returns true when the worker leveled up
    /// (its previous-level subset becomes evictable). Level is capped at
    /// n_levels. Throws CurriculumError on an unknown worker.
    bool report_result(int worker, bool success);

private:
    CurriculumConfig cfg_;
    std::vector<std::string> sorted_ids_;
    std::vector<std::pair<std::size_t, std::size_t>> levels_;

    struct Worker {
        int level = 1;
        std::deque<bool> window;
        int episodes_at_level = 0;
    };
    std::vector<Worker> workers_;

    void check_worker(int worker) const;
};

}  // namespace scensim
