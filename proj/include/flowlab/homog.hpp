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
#include <functional>
#include <vector>

#include "flowlab/parallel.hpp"
#include "flowlab/profile.hpp"
#include "flowlab/sde.hpp"

namespace flowlab::homog {

using coeff::PeriodicProfile;
using coeff::ProfilePair;
using sde::SolutionPath;

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // Richardson estimate |S_2n - S_n| / 15
    int panels = 0;
};

/// Composite Simpson on [0, 1] with dyadic refinement until two successive
/// levels agree to `tol` (absolute, scaled by max(1, |value|)).
QuadratureResult simpson(const std::function<double(double)>& f, double tol = 1e-12,
                         int max_doublings = 24);

struct HomogenizationSummary {
    double v = 0.0;          // int_0^1 dy / (H1^2 + H2^2)
    double beta1 = 0.0;      // v^(-1/2), effective volatility
    double alpha_hat = 0.0;  // sqrt(mean_mu(H1)^2 + mean_mu(H2)^2), common component
    double beta_hat = 0.0;   // sqrt(beta1^2 - alpha_hat^2), independent component
    double quad_err = 0.0;
};

/// Normalizer v of the invariant density 1 / (v (H1^2 + H2^2)).
QuadratureResult invariant_normalizer(const ProfilePair& pair);

/// mu-average of a period-1 function.
double mu_average(const std::function<double(double)>& f, const ProfilePair& pair);

/// beta1, alpha_hat, beta_hat for the pair. Requires H1 non-constant unless
/// `relaxed`.
HomogenizationSummary effective_constants(const ProfilePair& pair, bool relaxed = false);

std::string to_json(const HomogenizationSummary& s);

//---------------------------------------------------------------------------//
// Path estimators
//---------------------------------------------------------------------------//

/// Number of grid steps k with t0 + k dt < t; throws if t exceeds the path.
std::size_t steps_before(const SolutionPath& path, double t);

/// Sum over steps before t of (x_{k+1} - x_k)^2.
double realized_qv(const SolutionPath& path, double t);

/// Sum of products of increments; both paths must share the grid.
double realized_cross_qv(const SolutionPath& a, const SolutionPath& b, double t);

/// Trapezoid rule for int_0^t f(x_s / eps) ds on the path grid.
double ergodic_average(const SolutionPath& path, const std::function<double(double)>& f,
                       double epsilon, double t);

/// z(t) = x(t eps^2) / eps as a new path (times scaled by 1/eps^2).
SolutionPath rescale_path(const SolutionPath& path, double epsilon);

struct QVEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double t = 0.0;
    std::size_t n_paths = 0;
    double epsilon = 0.0;
    double epsilon_tilde = 0.0;
};

/// Mean and standard error (sample sd / sqrt(n)) of per-path values.
QVEstimate summarize(const std::vector<double>& samples);

/// Pearson correlation across paths.
double sample_correlation(const std::vector<double>& a, const std::vector<double>& b);

//---------------------------------------------------------------------------//
// Ensemble kernel: X^eps for several eps on one shared noise per path.
//---------------------------------------------------------------------------//

struct EnsembleSpec {
    ProfilePair pair;
    std::vector<double> epsilons;
    double x0 = 0.0;
    double t = 1.0;
    double dt = 1e-4;
    std::uint64_t seed = 0;
    std::size_t n_paths = 1;
    double rho = 0.1;
};

struct PathStats {
    std::vector<double> qv;        // per epsilon
    std::vector<double> cross;     // per pair (i, j), i < j, row-major
    std::vector<double> endpoint;  // X^eps(t) - x0 per epsilon
    std::vector<double> occupation_h1;  // int_0^t H1(X^eps / eps) ds per epsilon
};

/// Index of pair (i, j), i < j, among `count` processes.
std::size_t pair_index(std::size_t i, std::size_t j, std::size_t count);

/// Simulates path p with seed derive_seed(spec.seed, p), streaming the
/// estimators. Parallel over paths.
std::vector<PathStats> run_ensemble(const EnsembleSpec& spec, const ExecPolicy& exec = {});

namespace reference {

/// Serial reference built from integrate_with + the stored-path estimators.
std::vector<PathStats> run_ensemble_serial(const EnsembleSpec& spec);

}  // namespace reference

}  // namespace flowlab::homog
