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

#include <functional>

#include "scensim/sensing.hpp"

namespace scensim {

using Observations = std::map<std::string, std::vector<double>>;

/// Maps the current observations to one action per live driven agent.
using ActionProvider = std::function<std::map<std::string, AgentAction>(const World& world,
                                                                        const Observations& obs)>;

struct RolloutOptions {
    SensingConfig sensing;
    bool compute_observations = true;
    bool capture_trajectories = false;
    int max_steps = -1;  // default: horizon + overtime + 2
};

struct EpisodeResult {
    std::vector<EpisodeRecord> records;  // one per tracked agent
    std::map<std::string, std::vector<Vec2>> trajectories;
    int steps = 0;
};

/// Observations for every live, non-terminal, externally driven agent.
Observations observe_agents(World& world, const SensingConfig& cfg);

/// Steps the world until done (or the step bound), feeding observations to
/// the provider and its actions to the world.
EpisodeResult run_episode(World& world, const ActionProvider& provider,
                          const RolloutOptions& opts = {});

/// Provider that returns no actions, for worlds without driven agents.
ActionProvider null_provider();

/// Provider that holds a constant action for every driven agent.
ActionProvider constant_provider(AgentAction action);

}  // namespace scensim
