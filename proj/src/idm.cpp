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
#include "scensim/idm.hpp"

#include <algorithm>
#include <cmath>

namespace scensim {

double idm_acceleration(const IdmParams& p, double v, double v0, std::optional<LeaderInfo> leader) {
    double free_term = v0 > 0.0 ? std::pow(v / v0, p.exponent) : (v > 0.0 ? 1e9 : 1.0);
    double gap_term = 0.0;
    if (leader) {
        double desired_gap =
            p.min_gap + v * p.time_headway + v * leader->dv / (2.0 * std::sqrt(p.max_accel * p.comfort_decel));
        desired_gap = std::max(desired_gap, 0.0);
        double gap = std::max(leader->gap, 0.01);
        gap_term = (desired_gap / gap) * (desired_gap / gap);
    }
    double a = p.max_accel * (1.0 - free_term - gap_term);
    return std::clamp(a, -p.hard_brake, p.max_accel);
}

double idm_equilibrium_speed(const IdmParams& p, double v0, std::optional<double> gap) {
    if (!gap) {
        return v0;
    }
    if (*gap <= p.min_gap || v0 <= 0.0) {
        return 0.0;
    }
    double lo = 0.0, hi = v0;
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        double a = idm_acceleration(p, mid, v0, LeaderInfo{*gap, 0.0});
        if (a > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace scensim
