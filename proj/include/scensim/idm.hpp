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

#include <optional>

namespace scensim {

/// Canonical intelligent-driver-model constants.
struct IdmParams {
    double min_gap = 2.0;         // s0, meters
    double time_headway = 1.5;    // T, seconds
    double max_accel = 2.0;       // a_max, m/s^2
    double comfort_decel = 4.0;   // b, m/s^2
    double hard_brake = 7.5;      // clip floor, m/s^2
    double exponent = 4.0;        // delta
};

struct LeaderInfo {
    double gap = 0.0;  // bumper-to-bumper, meters, > 0
    double dv = 0.0;   // closing speed v - v_leader, m/s
};

/// Acceleration of a vehicle at speed v with desired speed v0 and an
/// optional leader; a = a_max [1 - (v/v0)^delta - (s*/gap)^2] with
/// s* = s0 + vT + v dv / (2 sqrt(a_max b)). No leader drops the gap term.
/// Result clipped to [-hard_brake, max_accel].
double idm_acceleration(const IdmParams& p, double v, double v0, std::optional<LeaderInfo> leader);

/// Equilibrium speed for a standing gap (dv = 0): the unique v in [0, v0]
/// with idm_acceleration == 0, found by bisection. No leader returns v0.
double idm_equilibrium_speed(const IdmParams& p, double v0, std::optional<double> gap);

}  // namespace scensim
