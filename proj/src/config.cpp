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

#include "flowlab/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <cstdio>
#include <functional>
#include <sstream>

#include "flowlab/errors.hpp"

namespace flowlab::cli {

namespace {

constexpr std::array<std::pair<Experiment, std::string_view>, 7> kExperimentNames{{
    {Experiment::coeff_probe, "coeff_probe"},
    {Experiment::homog_sweep, "homog_sweep"},
    {Experiment::cross_qv, "cross_qv"},
    {Experiment::union_prob, "union_prob"},
    {Experiment::race, "race"},
    {Experiment::bc_suite, "bc_suite"},
    {Experiment::corollary_plan, "corollary_plan"},
}};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

double parse_double(std::string_view key, std::string_view s) {
    double v = 0.0;
    s = trim(s);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(s) + "'");
    }
    return v;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view s) {
    Int v = 0;
    s = trim(s);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(s) + "'");
    }
    return v;
}

bool parse_bool(std::string_view key, std::string_view s) {
    s = trim(s);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(std::string(key) + ": expected true/false, got '" + std::string(s) + "'");
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    if (trim(s).empty()) return out;
    while (true) {
        const auto comma = s.find(',');
        out.push_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

std::string_view rate_name(bc::RateMode r) {
    switch (r) {
        case bc::RateMode::constant_alpha: return "constant_alpha";
        case bc::RateMode::constant_beta: return "constant_beta";
        case bc::RateMode::random_piecewise: return "random_piecewise";
    }
    return "?";
}

struct KeyDef {
    std::string_view name;
    std::function<void(ExperimentConfig&, std::string_view, std::string_view)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define FLOWLAB_DOUBLE(key, member)                                                         \
    KeyDef {                                                                                \
        key, [](ExperimentConfig& c, std::string_view k, std::string_view v) {              \
            c.member = parse_double(k, v);                                                  \
        },                                                                                  \
            [](const ExperimentConfig& c) { return format_double(c.member); }               \
    }
#define FLOWLAB_INT(key, member)                                                            \
    KeyDef {                                                                                \
        key, [](ExperimentConfig& c, std::string_view k, std::string_view v) {              \
            c.member = parse_int<decltype(c.member)>(k, v);                                 \
        },                                                                                  \
            [](const ExperimentConfig& c) { return std::to_string(c.member); }              \
    }

const std::vector<KeyDef>& key_table() {
    static const std::vector<KeyDef> table = {
        {"experiment",
         [](ExperimentConfig& c, std::string_view, std::string_view v) {
             c.experiment = experiment_from_string(trim(v));
         },
         [](const ExperimentConfig& c) { return std::string(to_string(c.experiment)); }},
        FLOWLAB_INT("seed", seed),
        FLOWLAB_DOUBLE("rho", rho),
        {"out", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.out = trim(v); },
         [](const ExperimentConfig& c) { return c.out; }},

        {"profile.kind",
         [](ExperimentConfig& c, std::string_view k, std::string_view v) {
             v = trim(v);
             if (v != "flat_point" && v != "raised_cosine" && v != "constant") {
                 throw ConfigError(std::string(k) + ": unknown profile '" + std::string(v) + "'");
             }
             c.profile = v;
         },
         [](const ExperimentConfig& c) { return c.profile; }},
        FLOWLAB_DOUBLE("profile.lower", lower),
        FLOWLAB_DOUBLE("profile.upper", upper),
        {"variant",
         [](ExperimentConfig& c, std::string_view k, std::string_view v) {
             v = trim(v);
             if (v == "one_driver") {
                 c.variant = coeff::Variant::one_driver;
             } else if (v == "two_driver") {
                 c.variant = coeff::Variant::two_driver;
             } else {
                 throw ConfigError(std::string(k) + ": expected one_driver or two_driver");
             }
         },
         [](const ExperimentConfig& c) {
             return std::string(c.variant == coeff::Variant::two_driver ? "two_driver" : "one_driver");
         }},
        {"ladder.rule",
         [](ExperimentConfig& c, std::string_view k, std::string_view v) {
             v = trim(v);
             if (v != "geometric_super" && v != "explicit_list") {
                 throw ConfigError(std::string(k) + ": expected geometric_super or explicit_list");
             }
             c.ladder_rule = v;
         },
         [](const ExperimentConfig& c) { return c.ladder_rule; }},
        FLOWLAB_DOUBLE("ladder.a_max", a_max),
        {"ladder.values",
         [](ExperimentConfig& c, std::string_view k, std::string_view v) {
             c.ladder_values.clear();
             for (auto item : split_list(v)) c.ladder_values.push_back(parse_int<std::int64_t>(k, item));
         },
         [](const ExperimentConfig& c) {
             std::string s;
             for (std::size_t i = 0; i < c.ladder_values.size(); ++i) {
                 s += (i ? ", " : "") + std::to_string(c.ladder_values[i]);
             }
             return s;
         }},
        {"layout.N",
         [](ExperimentConfig& c, std::string_view k, std::string_view v) {
             c.strips.clear();
             for (auto item : split_list(v)) c.strips.push_back(parse_int<std::int64_t>(k, item));
         },
         [](const ExperimentConfig& c) {
             std::string s;
             for (std::size_t i = 0; i < c.strips.size(); ++i) {
                 s += (i ? ", " : "") + std::to_string(c.strips[i]);
             }
             return s;
         }},
        FLOWLAB_DOUBLE("layout.blend_width", blend_width),

        {"homog.epsilons",
         [](ExperimentConfig& c, std::string_view k, std::string_view v) {
             c.epsilons.clear();
             for (auto item : split_list(v)) c.epsilons.push_back(parse_double(k, item));
         },
         [](const ExperimentConfig& c) {
             std::string s;
             for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
                 s += (i ? ", " : "") + format_double(c.epsilons[i]);
             }
             return s;
         }},
        FLOWLAB_DOUBLE("homog.cross_epsilon", cross_epsilon),
        FLOWLAB_DOUBLE("homog.epsilon_tilde", epsilon_tilde),
        FLOWLAB_INT("homog.paths", n_paths),
        FLOWLAB_DOUBLE("homog.t", t),
        FLOWLAB_DOUBLE("homog.x0", x0),

        FLOWLAB_DOUBLE("union.alpha_hat", alpha_hat),
        FLOWLAB_DOUBLE("union.beta_hat", beta_hat),
        FLOWLAB_DOUBLE("union.a", a),
        FLOWLAB_DOUBLE("union.delta", delta),
        FLOWLAB_DOUBLE("union.S", S),
        FLOWLAB_DOUBLE("union.T", T),
        FLOWLAB_INT("union.n_max", n_max),
        FLOWLAB_INT("union.runs", n_mc),
        FLOWLAB_INT("union.steps", union_steps),

        FLOWLAB_INT("race.levels", levels),
        FLOWLAB_INT("race.runs", runs),
        FLOWLAB_INT("race.grid_per_strip", grid_per_strip),
        FLOWLAB_DOUBLE("race.level_horizon", level_horizon),
        FLOWLAB_INT("race.first_strips", first_strips),
        FLOWLAB_INT("race.strip_step", strip_step),
        FLOWLAB_DOUBLE("race.k_tolerance", k_tolerance),
        FLOWLAB_INT("race.planning_paths", planning_paths),
        {"race.bridge",
         [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.bridge = parse_bool(k, v); },
         [](const ExperimentConfig& c) { return std::string(c.bridge ? "true" : "false"); }},

        FLOWLAB_INT("bc.n_max", bc_n_max),
        FLOWLAB_INT("bc.trials", bc_trials),
        FLOWLAB_INT("bc.fp_paths", fp_paths),
        FLOWLAB_INT("bc.fp_steps", fp_steps),

        FLOWLAB_DOUBLE("plan.alpha", alpha),
        FLOWLAB_DOUBLE("plan.beta", beta),
        FLOWLAB_DOUBLE("plan.T", plan_T),
        FLOWLAB_DOUBLE("plan.eps", eps),
        FLOWLAB_INT("plan.m", m),
        FLOWLAB_INT("plan.runs", plan_runs),
        {"plan.rates",
         [](ExperimentConfig& c, std::string_view k, std::string_view v) {
             v = trim(v);
             if (v == "constant_alpha") {
                 c.rates = bc::RateMode::constant_alpha;
             } else if (v == "constant_beta") {
                 c.rates = bc::RateMode::constant_beta;
             } else if (v == "random_piecewise") {
                 c.rates = bc::RateMode::random_piecewise;
             } else {
                 throw ConfigError(std::string(k) + ": unknown rate mode '" + std::string(v) + "'");
             }
         },
         [](const ExperimentConfig& c) { return std::string(rate_name(c.rates)); }},
    };
    return table;
}

#undef FLOWLAB_DOUBLE
#undef FLOWLAB_INT

}  // namespace

std::string_view to_string(Experiment e) {
    for (const auto& [k, name] : kExperimentNames) {
        if (k == e) return name;
    }
    return "?";
}

Experiment experiment_from_string(std::string_view name) {
    for (const auto& [k, n] : kExperimentNames) {
        if (n == name) return k;
    }
    throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

coeff::FrequencyLadder ExperimentConfig::make_ladder() const {
    if (ladder_rule == "explicit_list") return coeff::FrequencyLadder::explicit_list(ladder_values);
    return coeff::FrequencyLadder::geometric_super(a_max);
}

coeff::PeriodicProfile ExperimentConfig::make_profile() const {
    if (profile == "flat_point") return coeff::PeriodicProfile::flat_point(lower, upper);
    if (profile == "raised_cosine") return coeff::PeriodicProfile::raised_cosine(lower, upper);
    return coeff::PeriodicProfile::constant(upper);
}

coeff::ProfilePair ExperimentConfig::profile_pair() const {
    auto h1 = make_profile();
    if (variant == coeff::Variant::two_driver) {
        auto h2 = h1.complement();
        return {std::move(h1), std::move(h2)};
    }
    return {std::move(h1), std::nullopt};
}

void set_key(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
    for (const auto& def : key_table()) {
        if (def.name == key) {
            def.set(cfg, key, value);
            return;
        }
    }
    throw ConfigError("unknown key '" + std::string(key) + "'");
}

ExperimentConfig parse_config(std::string_view text, const ExperimentConfig& base) {
    ExperimentConfig cfg = base;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        try {
            set_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str(), base);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void validate(const ExperimentConfig& c) {
    const auto positive = [](std::string_view name, double v) {
        if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be > 0");
    };
    positive("rho", c.rho);
    positive("ladder.a_max", c.a_max);
    positive("profile.lower", c.lower);
    positive("profile.upper", c.upper);
    if (c.lower > c.upper) throw ConfigError("profile.lower must not exceed profile.upper");
    if (!(c.blend_width > 0.0 && c.blend_width < 0.5)) {
        throw ConfigError("layout.blend_width must lie in (0, 1/2)");
    }
    try {
        (void)c.make_ladder();
        (void)c.make_profile();
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("field description: ") + e.what());
    }
    if (c.strips.empty()) throw ConfigError("layout.N must not be empty");
    for (auto n : c.strips) {
        if (n < 2 || n % 2 != 0) throw ConfigError("layout.N entries must be even and >= 2");
    }
    if (c.epsilons.empty()) throw ConfigError("homog.epsilons must not be empty");
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
        positive("homog.epsilons", c.epsilons[i]);
        if (i > 0 && !(c.epsilons[i] < c.epsilons[i - 1])) {
            throw ConfigError("homog.epsilons must be strictly decreasing");
        }
    }
    positive("homog.cross_epsilon", c.cross_epsilon);
    positive("homog.epsilon_tilde", c.epsilon_tilde);
    positive("homog.t", c.t);
    if (c.n_paths < 2) throw ConfigError("homog.paths must be >= 2");
    positive("union.alpha_hat", c.alpha_hat);
    if (c.beta_hat < 0.0) throw ConfigError("union.beta_hat must be >= 0");
    if (c.a < 0.0) throw ConfigError("union.a must be >= 0");
    positive("union.delta", c.delta);
    positive("union.S", c.S);
    positive("union.T", c.T);
    if (c.n_max == 0 || c.n_mc == 0 || c.union_steps == 0) {
        throw ConfigError("union.n_max, union.runs and union.steps must be >= 1");
    }
    if (c.levels == 0 || c.runs == 0 || c.grid_per_strip < 1 || c.planning_paths < 2) {
        throw ConfigError("race.levels, race.runs, race.grid_per_strip >= 1 and race.planning_paths >= 2");
    }
    positive("race.level_horizon", c.level_horizon);
    if (c.first_strips < 2 || c.first_strips % 2 != 0 || c.strip_step < 0 || c.strip_step % 2 != 0) {
        throw ConfigError("race.first_strips must be even >= 2 and race.strip_step even >= 0");
    }
    positive("race.k_tolerance", c.k_tolerance);
    if (c.bc_n_max == 0 || c.bc_n_max > 24) throw ConfigError("bc.n_max must lie in 1..24");
    if (c.bc_trials == 0 || c.fp_paths < 2 || c.fp_steps == 0) {
        throw ConfigError("bc.trials >= 1, bc.fp_paths >= 2 and bc.fp_steps >= 1 required");
    }
    positive("plan.alpha", c.alpha);
    positive("plan.beta", c.beta);
    if (c.alpha > c.beta) throw ConfigError("plan.alpha must not exceed plan.beta");
    positive("plan.T", c.plan_T);
    if (!(c.eps > 0.0 && c.eps < 1.0)) throw ConfigError("plan.eps must lie in (0, 1)");
    if (c.m < 1 || c.plan_runs == 0) throw ConfigError("plan.m and plan.runs must be >= 1");
}

std::vector<std::string> known_keys() {
    std::vector<std::string> keys;
    for (const auto& def : key_table()) keys.emplace_back(def.name);
    std::sort(keys.begin(), keys.end());
    return keys;
}

std::string canonical_text(const ExperimentConfig& cfg) {
    std::vector<std::pair<std::string_view, std::string>> lines;
    for (const auto& def : key_table()) {
        if (def.name == "out") continue;  // where results go does not change them
        lines.emplace_back(def.name, def.get(cfg));
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& [k, v] : lines) {
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    }
    return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : canonical_text(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    std::array<char, 17> buf{};
    std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
    return buf.data();
}

}  // namespace flowlab::cli
