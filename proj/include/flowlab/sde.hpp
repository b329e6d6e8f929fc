/*
 * Copyright (C) 2026 The flowlab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "flowlab/brownian.hpp"
#include "flowlab/errors.hpp"
#include "flowlab/field.hpp"
#include "flowlab/parallel.hpp"

namespace flowlab::sde {

using coeff::CoefficientField;
using coeff::Vol;

//---------------------------------------------------------------------------//
// Coefficients seen by the integrator. Each provides
//   int drivers(), Vol vol(double x), double frequency(), bool flat().
// `frequency` is the largest oscillation frequency reachable, used by the
// step-size policy; `flat` waives the policy for constant coefficients.
//---------------------------------------------------------------------------//

/// sigma(., y) of the strip field along one horizontal line.
struct FieldLine {
    const CoefficientField* field;
    double y;

    int drivers() const noexcept { return field->drivers(); }
    Vol vol(double x) const noexcept { return field->eval(x, y); }
    double frequency() const { return field->max_frequency(); }
    bool flat() const noexcept { return field->profile().is_constant(); }
};

/// The frozen coefficient xi_j^n: sigma(z, y_hat) below level n and
/// H(a_j z) above it.
struct FrozenCoefficient {
    const CoefficientField* field;
    std::size_t level;
    std::size_t frequency_index;
    double y_hat;

    int drivers() const noexcept { return field->drivers(); }
    Vol vol(double z) const noexcept {
        if (z <= static_cast<double>(level)) return field->eval(z, y_hat);
        return field->strip_value(frequency_index, z);
    }
    double frequency() const {
        const double below = level == 0 ? 1.0 : field->max_frequency(level - 1);
        return std::max(below, static_cast<double>(field->ladder()[frequency_index]));
    }
    bool flat() const noexcept { return field->profile().is_constant(); }
};

/// sigma(x) = H1(x / eps) dW1 + H2(x / eps) dW2, the homogenization setting.
struct ScaledProfile {
    const coeff::ProfilePair* pair;
    double epsilon;

    int drivers() const noexcept { return pair->drivers(); }
    Vol vol(double x) const noexcept {
        const double z = x / epsilon;
        return {pair->h1(z), pair->h2 ? (*pair->h2)(z) : 0.0};
    }
    double frequency() const noexcept { return 1.0 / epsilon; }
    bool flat() const noexcept {
        return pair->h1.is_constant() && (!pair->h2 || pair->h2->is_constant());
    }
};

/// sigma == c; the additive-noise probe.
struct ConstantCoefficient {
    double c = 1.0;
    int driver_count = 1;

    int drivers() const noexcept { return driver_count; }
    Vol vol(double) const noexcept { return {c, driver_count == 2 ? c : 0.0}; }
    double frequency() const noexcept { return 1.0; }
    bool flat() const noexcept { return true; }
};

/// One Euler-Maruyama step. Shared by every kernel so that serial and
/// parallel code paths produce bit-identical states.
inline double em_step(double x, const Vol& v, const std::array<double, 2>& dw, int drivers) noexcept {
    if (drivers == 1) return x + v.s1 * dw[0];
    return x + (v.s1 * dw[0] + v.s2 * dw[1]);
}

//---------------------------------------------------------------------------//

struct StopRule {
    enum class Kind { horizon, hit_level, hit_either };
    Kind kind = Kind::horizon;
    double lower = 0.0;
    double upper = 0.0;

    static StopRule at_horizon() { return {}; }
    static StopRule hit(double level) { return {Kind::hit_level, level, level}; }
    static StopRule hit_either(double lo, double hi) { return {Kind::hit_either, lo, hi}; }
};

struct ExitEvent {
    double level;
    double time;
};

struct SolutionPath {
    double y_level = 0.0;
    double x0 = 0.0;
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> states;  // states[0] == x0
    std::optional<ExitEvent> exit;

    std::size_t steps() const noexcept { return states.empty() ? 0 : states.size() - 1; }
    double time(std::size_t k) const noexcept { return t0 + static_cast<double>(k) * dt; }
    double end_time() const noexcept { return time(steps()); }
};

struct IntegrateOptions {
    double rho = 0.1;               // dt <= (rho / frequency)^2
    bool enforce_resolution = true;
    bool bridge_correction = false;  // Brownian-bridge crossing test between grid points
    std::uint64_t start_step = 0;    // first path increment consumed
};

/// Largest admissible dt for a frequency under the step policy.
inline double required_dt(double frequency, double rho) {
    return (rho / frequency) * (rho / frequency);
}

void check_resolution(double dt, double frequency, double rho);

/// Linear-interpolation crossing of `level` inside [x, x_next]; returns the
/// fraction of the step, or nothing if the segment does not reach it.
std::optional<double> crossing_fraction(double x, double x_next, double level) noexcept;

/// Probability that a Brownian bridge from x to x_next with variance
/// var * dt touches `level` (endpoints on the same side).
double bridge_crossing_probability(double x, double x_next, double level, double var_dt) noexcept;

namespace detail {

// First crossing of a stop rule's levels on one step; nothing if none.
std::optional<ExitEvent> detect_exit(const StopRule& stop, double x, double x_next, double t,
                                     double dt, double var, double u) noexcept;

}  // namespace detail

/// Euler-Maruyama path of dX = sigma(X) dW driven by `path`, recorded on
/// every grid point until the stop rule fires or the path ends.
template <class Coefficient>
SolutionPath integrate_with(const Coefficient& c, double x0, double y_level,
                            const BrownianPath& path, const StopRule& stop = {},
                            const IntegrateOptions& opt = {}) {
    if (c.drivers() > path.drivers()) {
        throw ParameterError("integrate: coefficient needs more drivers than the path has");
    }
    if (opt.enforce_resolution && !c.flat()) check_resolution(path.dt(), c.frequency(), opt.rho);
    SolutionPath out;
    out.y_level = y_level;
    out.x0 = x0;
    out.dt = path.dt();
    out.t0 = path.time(opt.start_step);
    if (opt.start_step > path.steps()) throw ParameterError("integrate: start beyond horizon");
    out.states.reserve(static_cast<std::size_t>(path.steps() - opt.start_step) + 1);
    out.states.push_back(x0);
    const int drivers = c.drivers();
    double x = x0;
    BrownianCursor cursor(path, opt.start_step);
    while (!cursor.done()) {
        const std::uint64_t k = cursor.position();
        const auto dw = cursor.next();
        const Vol v = c.vol(x);
        const double xn = em_step(x, v, dw, drivers);
        out.states.push_back(xn);
        if (stop.kind != StopRule::Kind::horizon) {
            const double var = v.s1 * v.s1 + v.s2 * v.s2;
            const double u = opt.bridge_correction ? path.bridge_uniform(0, k) : 2.0;
            if (auto e = detail::detect_exit(stop, x, xn, path.time(k), path.dt(), var, u)) {
                out.exit = e;
                break;
            }
        }
        x = xn;
    }
    return out;
}

SolutionPath integrate(const CoefficientField& field, double x0, double y_level,
                       const BrownianPath& path, const StopRule& stop = {},
                       const IntegrateOptions& opt = {});

SolutionPath frozen_integrate(const FrozenCoefficient& frozen, double start,
                              const BrownianPath& path, const StopRule& stop = {},
                              const IntegrateOptions& opt = {});

//---------------------------------------------------------------------------//
// Bundles: many initial conditions, one shared noise path.
//---------------------------------------------------------------------------//

struct InitialCondition {
    double x0;
    double y;
};

struct FlowBundle {
    BrownianPath shared_path;
    std::vector<SolutionPath> members;
};

/// All members step together block by block; members within a block are
/// advanced in parallel. Output is independent of the thread count.
FlowBundle integrate_bundle(const CoefficientField& field,
                            const std::vector<InitialCondition>& initial,
                            const BrownianPath& path, const IntegrateOptions& opt = {},
                            const ExecPolicy& exec = {});

namespace reference {

/// Serial reference: one independent integrate() per member.
FlowBundle integrate_bundle_serial(const CoefficientField& field,
                                   const std::vector<InitialCondition>& initial,
                                   const BrownianPath& path, const IntegrateOptions& opt = {});

}  // namespace reference

/// Fraction of adjacent member pairs (sorted by x0, same y) whose order is
/// reversed at any grid time.
double order_violation_rate(const FlowBundle& bundle);

//---------------------------------------------------------------------------//
// The level race
//---------------------------------------------------------------------------//

struct RaceEntry {
    std::size_t level;        // n
    double tau;               // tau_{n+1}
    std::int64_t strip_index;  // even strip of level n holding the winner
    double interval_lo;       // I_{n+1}
    double interval_hi;
};

struct RaceTranscript {
    std::vector<RaceEntry> entries;
    std::vector<double> dt_per_level;
    bool complete = false;
    std::string note;
};

struct RaceOptions {
    double rho = 0.1;
    bool enforce_resolution = true;
    // Coarsen the grid per level to the largest power-of-two multiple of
    // path.dt() that satisfies the step policy for that level.
    bool adaptive_dt = false;
    // Abandon a level after this much time without a crossing.
    double level_horizon = std::numeric_limits<double>::infinity();
    bool bridge_correction = false;
};

/// tau_0 = 0, I_0 = [0, 1]; at each level every even sub-strip of I_n is
/// restarted at x = n at tau_n; tau_{n+1} is the first crossing of n + 1
/// and I_{n+1} the winner's strip (ties: lowest index).
RaceTranscript race_stopping_times(const CoefficientField& field, std::size_t level_max,
                                   const BrownianPath& path, int grid_per_strip = 1,
                                   const RaceOptions& opt = {});

}  // namespace flowlab::sde
