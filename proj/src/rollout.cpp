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
#include "scensim/rollout.hpp"

namespace scensim {

Observations observe_agents(World& world, const SensingConfig& cfg) {
    Observations obs;
    for (const auto& [id, status] : world.agents()) {
        const ObjectState* obj = world.find_object(id);
        if (obj != nullptr && obj->alive && obj->policy == PolicyKind::EnvInput &&
            status.termination == Termination::Running && status.spawned) {
            obs.emplace(id, observe(world, id, cfg));
        }
    }
    return obs;
}

EpisodeResult run_episode(World& world, const ActionProvider& provider, const RolloutOptions& opts) {
    EpisodeResult result;
    const int max_steps = opts.max_steps > 0
                              ? opts.max_steps
                              : world.horizon() + world.config().overtime_steps + 2;

    auto capture = [&] {
        if (!opts.capture_trajectories) {
            return;
        }
        for (const auto& [id, status] : world.agents()) {
            const ObjectState* obj = world.find_object(id);
            if (obj != nullptr && obj->alive) {
                result.trajectories[id].push_back(obj->pos);
            }
        }
    };

    capture();
    while (!world.done() && result.steps < max_steps) {
        Observations obs;
        if (opts.compute_observations) {
            obs = observe_agents(world, opts.sensing);
        }
        std::map<std::string, AgentAction> actions = provider(world, obs);
        world.step(actions);
        result.steps += 1;
        capture();
    }

    for (const auto& [id, status] : world.agents()) {
        EpisodeRecord record;
        record.scenario_id = world.scenario().scenario_id;
        record.agent_id = id;
        record.outcome = status.termination;
        record.route_completion = status.route_completion;
        record.mean_speed = status.steps > 0 ? status.speed_sum / status.steps : 0.0;
        record.total_reward = status.total_reward;
        record.crashes = status.crashes;
        record.steps = status.steps;
        result.records.push_back(std::move(record));
    }
    return result;
}

ActionProvider null_provider() {
    return [](const World&, const Observations&) { return std::map<std::string, AgentAction>{}; };
}

ActionProvider constant_provider(AgentAction action) {
    return [action](const World&, const Observations& obs) {
        std::map<std::string, AgentAction> actions;
        for (const auto& [id, o] : obs) {
            actions.emplace(id, action);
        }
        return actions;
    };
}

}  // namespace scensim
