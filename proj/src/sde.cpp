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

#include "flowlab/sde.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace flowlab::sde {

void check_resolution(double dt, double frequency, double rho) {
    const double need = required_dt(frequency, rho);
    if (dt > need * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "time step " << dt << " too coarse for frequency " << frequency << " (rho = " << rho
            << "); required dt <= " << need;
        throw ResolutionError(msg.str(), need);
    }
}

std::optional<double> crossing_fraction(double x, double x_next, double level) noexcept {
    if (x == level) return 0.0;
    if ((x < level && x_next >= level) || (x > level && x_next <= level)) {
        return (level - x) / (x_next - x);
    }
    return std::nullopt;
}

double bridge_crossing_probability(double x, double x_next, double level, double var_dt) noexcept {
    const double a = level - x;
    const double b = level - x_next;
    if (a * b <= 0.0) return 1.0;
    if (var_dt <= 0.0) return 0.0;
    return std::exp(-2.0 * a * b / var_dt);
}

namespace detail {

std::optional<ExitEvent> detect_exit(const StopRule& stop, double x, double x_next, double t,
                                     double dt, double var, double u) noexcept {
    std::optional<ExitEvent> best;
    const auto consider = [&](double level, double frac) {
        const double when = t + frac * dt;
        if (!best || when < best->time) best = ExitEvent{level, when};
    };
    const bool bridge = u <= 1.0;
    const auto check = [&](double level, bool use_upper_tail) {
        if (auto f = crossing_fraction(x, x_next, level)) {
            consider(level, *f);
        } else if (bridge) {
            const double p = bridge_crossing_probability(x, x_next, level, var * dt);
            const bool hit = use_upper_tail ? (u > 1.0 - p) : (u < p);
            if (hit) consider(level, 0.5);
        }
    };
    switch (stop.kind) {
        case StopRule::Kind::horizon: break;
        case StopRule::Kind::hit_level: check(stop.upper, false); break;
        case StopRule::Kind::hit_either:
            check(stop.upper, false);
            check(stop.lower, true);
            break;
    }
    return best;
}

}  // namespace detail

SolutionPath integrate(const CoefficientField& field, double x0, double y_level,
                       const BrownianPath& path, const StopRule& stop,
                       const IntegrateOptions& opt) {
    return integrate_with(FieldLine{&field, y_level}, x0, y_level, path, stop, opt);
}

SolutionPath frozen_integrate(const FrozenCoefficient& frozen, double start,
                              const BrownianPath& path, const StopRule& stop,
                              const IntegrateOptions& opt) {
    if (frozen.frequency_index >= frozen.field->ladder().size()) {
        throw ParameterError("frozen_integrate: frequency index beyond the ladder");
    }
    return integrate_with(frozen, start, frozen.y_hat, path, stop, opt);
}

//---------------------------------------------------------------------------//
// Bundles
//---------------------------------------------------------------------------//

namespace {

void check_bundle_inputs(const CoefficientField& field, const std::vector<InitialCondition>& initial,
                         const BrownianPath& path, const IntegrateOptions& opt) {
    if (initial.empty()) throw ParameterError("integrate_bundle: empty initial set");
    if (field.drivers() > path.drivers()) {
        throw ParameterError("integrate_bundle: field needs more drivers than the path has");
    }
    if (opt.start_step > path.steps()) throw ParameterError("integrate_bundle: start beyond horizon");
    if (opt.enforce_resolution && !field.profile().is_constant()) {
        check_resolution(path.dt(), field.max_frequency(), opt.rho);
    }
}

}  // namespace

FlowBundle integrate_bundle(const CoefficientField& field,
                            const std::vector<InitialCondition>& initial,
                            const BrownianPath& path, const IntegrateOptions& opt,
                            const ExecPolicy& exec) {
    check_bundle_inputs(field, initial, path, opt);
    const int drivers = field.drivers();
    const auto total = static_cast<std::size_t>(path.steps() - opt.start_step);
    FlowBundle bundle{path, {}};
    bundle.members.resize(initial.size());
    for (std::size_t m = 0; m < initial.size(); ++m) {
        auto& member = bundle.members[m];
        member.y_level = initial[m].y;
        member.x0 = initial[m].x0;
        member.t0 = path.time(opt.start_step);
        member.dt = path.dt();
        member.states.reserve(total + 1);
        member.states.push_back(initial[m].x0);
    }

    constexpr std::size_t kBlock = 4096;
    std::vector<double> dw0;
    std::vector<double> dw1;
    for (std::size_t done = 0; done < total; done += kBlock) {
        const std::size_t n = std::min(kBlock, total - done);
        const std::uint64_t first = opt.start_step + done;
        dw0.resize(n);
        path.fill(0, first, dw0);
        if (drivers == 2) {
            dw1.resize(n);
            path.fill(1, first, dw1);
        }
        parallel_for(bundle.members.size(), exec, [&](std::size_t m) {
            auto& member = bundle.members[m];
            double x = member.states.back();
            for (std::size_t i = 0; i < n; ++i) {
                const std::array<double, 2> dw{dw0[i], drivers == 2 ? dw1[i] : 0.0};
                x = em_step(x, field.eval(x, member.y_level), dw, drivers);
                member.states.push_back(x);
            }
        });
    }
    return bundle;
}

namespace reference {

FlowBundle integrate_bundle_serial(const CoefficientField& field,
                                   const std::vector<InitialCondition>& initial,
                                   const BrownianPath& path, const IntegrateOptions& opt) {
    check_bundle_inputs(field, initial, path, opt);
    FlowBundle bundle{path, {}};
    for (const auto& ic : initial) {
        bundle.members.push_back(integrate(field, ic.x0, ic.y, path, StopRule::at_horizon(), opt));
    }
    return bundle;
}

}  // namespace reference

double order_violation_rate(const FlowBundle& bundle) {
    std::map<double, std::vector<const SolutionPath*>> by_level;
    for (const auto& m : bundle.members) by_level[m.y_level].push_back(&m);
    std::size_t pairs = 0;
    std::size_t violations = 0;
    for (auto& [y, group] : by_level) {
        std::sort(group.begin(), group.end(),
                  [](const SolutionPath* a, const SolutionPath* b) { return a->x0 < b->x0; });
        for (std::size_t i = 0; i + 1 < group.size(); ++i) {
            const auto& lo = group[i]->states;
            const auto& hi = group[i + 1]->states;
            if (group[i]->x0 == group[i + 1]->x0) continue;
            ++pairs;
            const std::size_t n = std::min(lo.size(), hi.size());
            for (std::size_t k = 0; k < n; ++k) {
                if (lo[k] > hi[k]) {
                    ++violations;
                    break;
                }
            }
        }
    }
    return pairs == 0 ? 0.0 : static_cast<double>(violations) / static_cast<double>(pairs);
}

//---------------------------------------------------------------------------//
// Race
//---------------------------------------------------------------------------//

namespace {

struct Racer {
    std::int64_t strip;
    double y;
    double x;
};

}  // namespace

RaceTranscript race_stopping_times(const CoefficientField& field, std::size_t level_max,
                                   const BrownianPath& path, int grid_per_strip,
                                   const RaceOptions& opt) {
    const auto& layout = field.layout();
    if (level_max >= layout.levels()) {
        throw ParameterError("race: layout defines levels 0.." + std::to_string(layout.levels() - 1) +
                             ", requested level_max " + std::to_string(level_max));
    }
    if (grid_per_strip < 1) throw ParameterError("race: grid_per_strip must be >= 1");
    if (field.drivers() > path.drivers()) {
        throw ParameterError("race: field needs more drivers than the path has");
    }
    const bool flat = field.profile().is_constant();

    // Grid shift per level, non-increasing so that each level's start time
    // lies on the next level's grid.
    std::vector<int> shift(level_max + 1, 0);
    for (std::size_t n = 0; n <= level_max; ++n) {
        if (flat) continue;
        if (!opt.adaptive_dt) {
            if (opt.enforce_resolution) {
                check_resolution(path.dt(), field.max_frequency(level_max), opt.rho);
            }
            continue;
        }
        const double need = required_dt(field.max_frequency(n), opt.rho);
        if (opt.enforce_resolution) check_resolution(path.dt(), field.max_frequency(n), opt.rho);
        int s = 0;
        while (std::ldexp(path.dt(), s + 1) <= need * (1.0 + 1e-12) && s < 60) ++s;
        shift[n] = n == 0 ? s : std::min(s, shift[n - 1]);
    }

    RaceTranscript out;
    std::uint64_t start = 0;  // index on the current level's grid
    double tau = 0.0;
    std::int64_t parent_strip = -1;
    const int drivers = field.drivers();

    for (std::size_t n = 0; n <= level_max; ++n) {
        const BrownianPath grid = shift[n] == 0 ? path : path.rescaled_grid(shift[n]);
        out.dt_per_level.push_back(grid.dt());
        const std::int64_t strips = layout.strips(n);
        const std::int64_t m_n = layout.cumulative(n);
        const std::int64_t first_strip = n == 0 ? 0 : parent_strip * strips;

        std::vector<Racer> racers;
        for (std::int64_t j = first_strip; j < first_strip + strips; j += 2) {
            for (int g = 0; g < grid_per_strip; ++g) {
                const double y =
                    (static_cast<double>(j) + (g + 0.5) / grid_per_strip) / static_cast<double>(m_n);
                racers.push_back({j, y, static_cast<double>(n)});
            }
        }

        const double target = static_cast<double>(n + 1);
        const auto level_steps = static_cast<std::uint64_t>(
            std::min(opt.level_horizon / grid.dt(), 9e18));
        BrownianCursor cursor(grid, start);
        std::optional<std::pair<double, const Racer*>> winner;
        std::uint64_t k = start;
        while (!winner) {
            if (cursor.done()) {
                out.note = "path horizon exhausted at level " + std::to_string(n);
                return out;
            }
            if (k - start >= level_steps) {
                out.note = "level horizon exceeded at level " + std::to_string(n);
                return out;
            }
            k = cursor.position();
            const auto dw = cursor.next();
            const double u = opt.bridge_correction ? grid.bridge_uniform(0, k) : 2.0;
            for (auto& r : racers) {
                const Vol v = field.eval(r.x, r.y);
                const double xn = em_step(r.x, v, dw, drivers);
                std::optional<double> frac;
                if (xn >= target) {
                    frac = (target - r.x) / (xn - r.x);
                } else if (u <= 1.0 &&
                           u < bridge_crossing_probability(r.x, xn, target,
                                                           (v.s1 * v.s1 + v.s2 * v.s2) * grid.dt())) {
                    frac = 0.5;
                }
                if (frac) {
                    const double when = grid.time(k) + *frac * grid.dt();
                    if (!winner || when < winner->first) winner.emplace(when, &r);
                }
                r.x = xn;
            }
            ++k;
        }
        tau = winner->first;
        parent_strip = winner->second->strip;
        out.entries.push_back({n, tau, parent_strip,
                               static_cast<double>(parent_strip) / static_cast<double>(m_n),
                               static_cast<double>(parent_strip + 1) / static_cast<double>(m_n)});
        if (n < level_max) start = k << (shift[n] - shift[n + 1]);
    }
    out.complete = true;
    return out;
}

}  // namespace flowlab::sde
