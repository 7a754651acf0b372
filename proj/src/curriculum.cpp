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
#include "scensim/curriculum.hpp"

#include <algorithm>
#include <cmath>

namespace scensim {

CurriculumState CurriculumState::build(const DatabaseManifest& db, CurriculumConfig cfg) {
    if (db.size() == 0) {
        throw CurriculumError("cannot build a curriculum from an empty database");
    }
    if (cfg.n_levels < 1 || cfg.n_subsets < 1 || cfg.window < 1) {
        throw CurriculumError("curriculum configuration values must be positive");
    }
    CurriculumState state;
    state.cfg_ = cfg;

    struct Key {
        double difficulty;
        double ego_distance;
        const std::string* id;
    };
    std::vector<Key> keys;
    keys.reserve(db.size());
    for (const auto& [id, meta] : db.summary) {
        auto it = meta.per_object_moving_distance.find(meta.sdc_id);
        double ego = it == meta.per_object_moving_distance.end() ? 0.0 : it->second;
        keys.push_back({meta.difficulty.value_or(0.0), ego, &id});
    }
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
        if (a.difficulty != b.difficulty) {
            return a.difficulty < b.difficulty;
        }
        if (a.ego_distance != b.ego_distance) {
            return a.ego_distance < b.ego_distance;
        }
        return *a.id < *b.id;
    });
    state.sorted_ids_.reserve(keys.size());
    for (const Key& k : keys) {
        state.sorted_ids_.push_back(*k.id);
    }

    // contiguous levels; a smaller database shrinks levels proportionally
    const std::size_t total = state.sorted_ids_.size();
    std::size_t n_levels = static_cast<std::size_t>(cfg.n_levels);
    if (total >= n_levels * static_cast<std::size_t>(cfg.per_level)) {
        n_levels = total / static_cast<std::size_t>(cfg.per_level);
        n_levels = std::min(n_levels, static_cast<std::size_t>(cfg.n_levels));
    }
    n_levels = std::min(n_levels, total);
    std::size_t begin = 0;
    for (std::size_t level = 0; level < n_levels; ++level) {
        std::size_t size = total / n_levels + (level < total % n_levels ? 1 : 0);
        state.levels_.emplace_back(begin, begin + size);
        begin += size;
    }

    state.workers_.assign(static_cast<std::size_t>(cfg.n_subsets), Worker{});
    return state;
}

std::pair<std::size_t, std::size_t> CurriculumState::level_range(int level) const {
    if (level < 1 || level > n_levels()) {
        throw CurriculumError("level out of range: " + std::to_string(level));
    }
    return levels_[static_cast<std::size_t>(level - 1)];
}

std::vector<std::string> CurriculumState::subset(int level, int subset_index) const {
    if (subset_index < 0 || subset_index >= cfg_.n_subsets) {
        throw CurriculumError("subset index out of range: " + std::to_string(subset_index));
    }
    auto [begin, end] = level_range(level);
    std::vector<std::string> out;
    for (std::size_t i = begin + static_cast<std::size_t>(subset_index); i < end;
         i += static_cast<std::size_t>(cfg_.n_subsets)) {
        out.push_back(sorted_ids_[i]);
    }
    return out;
}

void CurriculumState::check_worker(int worker) const {
    if (worker < 0 || worker >= static_cast<int>(workers_.size())) {
        throw CurriculumError("unknown worker: " + std::to_string(worker));
    }
}

int CurriculumState::worker_level(int worker) const {
    check_worker(worker);
    return workers_[static_cast<std::size_t>(worker)].level;
}

std::vector<std::string> CurriculumState::resident_scenarios(int worker) const {
    check_worker(worker);
    return subset(workers_[static_cast<std::size_t>(worker)].level, worker % cfg_.n_subsets);
}

double CurriculumState::worker_success_rate(int worker) const {
    check_worker(worker);
    const Worker& w = workers_[static_cast<std::size_t>(worker)];
    if (w.window.empty()) {
        return 0.0;
    }
    double hits = 0.0;
    for (bool b : w.window) {
        hits += b ? 1.0 : 0.0;
    }
    return hits / static_cast<double>(w.window.size());
}

bool CurriculumState::report_result(int worker, bool success) {
    check_worker(worker);
    Worker& w = workers_[static_cast<std::size_t>(worker)];
    w.window.push_back(success);
    if (static_cast<int>(w.window.size()) > cfg_.window) {
        w.window.pop_front();
    }
    w.episodes_at_level += 1;
    if (w.level >= n_levels()) {
        return false;  // top level is terminal
    }
    if (w.episodes_at_level < cfg_.window) {
        return false;  // need a full evaluation window first
    }
    if (worker_success_rate(worker) >= cfg_.success_gate) {
        w.level += 1;
        w.window.clear();
        w.episodes_at_level = 0;
        return true;
    }
    return false;
}

}  // namespace scensim
