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
#include <optional>
#include <vector>

#include "flowlab/config.hpp"
#include "flowlab/field.hpp"
#include "flowlab/parallel.hpp"
#include "flowlab/report.hpp"

namespace flowlab::cli {

/// Strip field described by the config's field keys.
coeff::CoefficientField build_field(const ExperimentConfig& cfg);

struct UnionParams {
    double alpha_hat = 1.0;
    double beta_hat = 1.0;
    double a = 1.0;
    double delta = 0.1;
    double S = 1.0;
    double T = 1.0;
    std::size_t n_max = 200;
    std::size_t steps = 256;  // grid on [0, max(S, T)]
};

struct UnionCurve {
    std::vector<double> p;   // p[n-1] = P(A_1 u ... u A_n)
    std::vector<double> se;
    std::optional<std::size_t> n_star;  // smallest n with p >= target
    bool monotone = true;               // no drop beyond 2 standard errors
    std::size_t runs = 0;
};

/*!
 * Estimates P(union of A_i, i <= n) for A_i = {sup_[0,S] Z_i >= a} and
 * {inf_[0,T] Z_i >= -delta}, Z_i = alpha_hat W + beta_hat B_i, for every
 * n <= n_max. Grid extremes are corrected with Brownian-bridge crossing
 * tests whose uniforms are shared across i, so beta_hat = 0 gives
 * identical events.
 */
UnionCurve run_union_experiment(const UnionParams& params, std::size_t n_mc, std::uint64_t seed,
                                const ExecPolicy& exec = {}, double target = 0.95);

/// Number of strips per level used by the race: the planned
/// 2 (k_n + N~_n), capped by the ladder and by first + step * n.
std::int64_t realized_strips(std::int64_t planned, std::size_t ladder_size, std::int64_t first,
                             std::int64_t step, std::size_t level);

ExperimentReport run_coeff_probe(const ExperimentConfig& cfg, const ExecPolicy& exec = {});
ExperimentReport run_homog_sweep(const ExperimentConfig& cfg, const ExecPolicy& exec = {});
ExperimentReport run_cross_qv(const ExperimentConfig& cfg, const ExecPolicy& exec = {});
ExperimentReport run_union(const ExperimentConfig& cfg, const ExecPolicy& exec = {});
ExperimentReport run_race(const ExperimentConfig& cfg, const ExecPolicy& exec = {});
ExperimentReport run_bc_suite(const ExperimentConfig& cfg, const ExecPolicy& exec = {});
ExperimentReport run_corollary_plan(const ExperimentConfig& cfg, const ExecPolicy& exec = {});

/// Dispatches on cfg.experiment.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const ExecPolicy& exec = {});

}  // namespace flowlab::cli
