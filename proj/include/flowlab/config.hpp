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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "flowlab/bc.hpp"
#include "flowlab/field.hpp"
#include "flowlab/profile.hpp"

namespace flowlab::cli {

enum class Experiment { coeff_probe, homog_sweep, cross_qv, union_prob, race, bc_suite, corollary_plan };

std::string_view to_string(Experiment e);
Experiment experiment_from_string(std::string_view name);

/*!
 * Flat `key = value` configuration. Lines starting with `#` are comments,
 * lists are comma separated. Every key has a default; unknown keys are an
 * error. See configs/ for one file per experiment.
 */
struct ExperimentConfig {
    Experiment experiment = Experiment::homog_sweep;
    std::uint64_t seed = 20260101;
    double rho = 0.1;
    std::string out = "out";

    // field
    std::string profile = "flat_point";  // flat_point | raised_cosine | constant
    double lower = 0.5;
    double upper = 1.0;
    coeff::Variant variant = coeff::Variant::one_driver;
    std::string ladder_rule = "geometric_super";  // geometric_super | explicit_list
    double a_max = 1000.0;
    std::vector<std::int64_t> ladder_values;
    std::vector<std::int64_t> strips{2, 4, 6, 8};
    double blend_width = 0.25;

    // homogenization
    std::vector<double> epsilons{0.2, 0.1, 0.05, 0.02};
    double cross_epsilon = 0.1;
    double epsilon_tilde = 0.005;
    std::size_t n_paths = 200;
    double t = 1.0;
    double x0 = 0.0;

    // union experiment
    double alpha_hat = 1.0;
    double beta_hat = 1.0;
    double a = 1.0;
    double delta = 0.1;
    double S = 1.0;
    double T = 1.0;
    std::size_t n_max = 200;
    std::size_t n_mc = 10000;
    std::size_t union_steps = 256;

    // race
    std::size_t levels = 4;
    std::size_t runs = 100;
    int grid_per_strip = 1;
    double level_horizon = 16.0;
    std::int64_t first_strips = 2;
    std::int64_t strip_step = 2;
    double k_tolerance = 0.05;
    std::size_t planning_paths = 400;
    bool bridge = false;

    // bc suite
    std::size_t bc_n_max = 12;
    std::size_t bc_trials = 1000;
    std::size_t fp_paths = 100000;
    std::size_t fp_steps = 256;

    // corollary plan
    double alpha = 1.0;
    double beta = 1.0;
    double plan_T = 1.0;
    double eps = 0.25;
    std::int64_t m = 2;
    std::size_t plan_runs = 10000;
    bc::RateMode rates = bc::RateMode::random_piecewise;

    /// Profile (and complement for two drivers) described by the field keys.
    coeff::ProfilePair profile_pair() const;
    coeff::PeriodicProfile make_profile() const;
    coeff::FrequencyLadder make_ladder() const;
};

/// Parses config text; throws ConfigError naming the line on any problem.
ExperimentConfig parse_config(std::string_view text, const ExperimentConfig& base = {});
ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base = {});

/// Applies one `key = value` assignment.
void set_key(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Range checks across all fields.
void validate(const ExperimentConfig& cfg);

/// Canonical text form: every key except `out`, sorted, shortest
/// round-trip numbers.
std::string canonical_text(const ExperimentConfig& cfg);

/// FNV-1a 64 of canonical_text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

std::vector<std::string> known_keys();

}  // namespace flowlab::cli
