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
#include <string>
#include <vector>

#include "flowlab/parallel.hpp"

namespace flowlab::bc {

/// N events with probabilities p and a threshold M, 1 <= M <= N.
class EventProfile {
  public:
    EventProfile(std::vector<double> p, std::size_t m);

    const std::vector<double>& p() const noexcept { return p_; }
    std::size_t n() const noexcept { return p_.size(); }
    std::size_t m() const noexcept { return m_; }
    double total() const noexcept;

  private:
    std::vector<double> p_;
    std::size_t m_;
};

/// sum p_i / M. Unclamped.
double bc_upper(const EventProfile& profile);
/// (sum p_i - M + 1) / (N - M + 1). Unclamped.
double bc_lower(const EventProfile& profile);

enum class ExactMethod { automatic, enumeration, poisson_binomial };

/// P(at least m of the independent events occur). Enumeration needs
/// N <= 24; m = 0 gives 1.
double exact_at_least(const std::vector<double>& p, std::size_t m,
                      ExactMethod method = ExactMethod::automatic);
double exact_at_least(const EventProfile& profile, ExactMethod method = ExactMethod::automatic);

/// Standard normal CDF.
double normal_cdf(double x) noexcept;

/// Lower bound on P(sup_{s<=t} M(s) >= a) for a martingale with
/// d<M>/dt >= alpha: 2 (1 - Phi(a / sqrt(alpha t))).
double p0(double a, double t, double alpha);
/// Lower bound on P(inf_{s<=t} M(s) >= -a) for d<M>/dt <= beta:
/// 2 Phi(a / sqrt(beta t)) - 1.
double q0(double a, double t, double beta);

struct PassagePlan {
    double alpha = 0.0;
    double beta = 0.0;
    double T = 0.0;
    double eps = 0.0;
    std::int64_t m = 0;
    double delta = 0.0;
    double u = 0.0;
    std::int64_t k = 0;
    std::int64_t N = 0;

    /// q0(delta, u T; beta) * p0(2 delta, T / 2; alpha)
    double product() const;
};

struct PlanSearch {
    double delta_max = 1.0;
    int delta_octaves = 48;   // delta = delta_max 2^-e (1 + f/16)
    int u_octaves = 60;       // u = 2^-(e+1) (1 + f/16) restricted to (0, 1/2]
    int mantissa_steps = 16;
};

/// Chooses (delta, u) with q0 p0 >= 1 - eps/2, u maximal on the dyadic grid
/// (ties: largest delta), then k = ceil(m / u) and N = 2k - 2.
PassagePlan plan_corollary(double alpha, double beta, double T, double eps, std::int64_t m,
                           const PlanSearch& search = {});

std::string to_json(const PassagePlan& plan);

enum class RateMode { constant_alpha, constant_beta, random_piecewise };

struct CorollaryValidation {
    double estimate = 0.0;    // P{tau <= T}
    double ci_radius = 0.0;   // 99% normal-approximation radius
    std::size_t runs = 0;
    bool passed = false;      // estimate + radius >= 1 - eps
};

struct ValidationOptions {
    RateMode rates = RateMode::random_piecewise;
    std::size_t steps = 256;  // grid on [0, T]
    std::size_t rate_pieces = 8;
};

/// Simulates N martingales W_i(<M_i>_t) with rates in [alpha, beta] and
/// records whether m of them are simultaneously >= delta before T.
CorollaryValidation validate_corollary(const PassagePlan& plan, std::size_t n_mc,
                                       std::uint64_t seed, const ValidationOptions& opt = {},
                                       const ExecPolicy& exec = {});

//---------------------------------------------------------------------------//

struct CompletenessCriterion {
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> empirical_p;  // may be empty
    std::vector<double> radius;       // confidence radius per empirical entry
};

enum class Verdict { consistent, inconsistent, insufficient_data };
std::string to_string(Verdict v);

struct CriterionReport {
    std::vector<double> partial_a;
    std::vector<double> partial_b;
    double a_tail_growth = 0.0;  // (S_a(H) - S_a(H/2)) / S_a(H/2)
    double b_tail_share = 0.0;   // (S_b(H) - S_b(H/2)) / S_b(H)
    bool a_diverging = false;
    bool b_summable = false;
    std::vector<std::size_t> violations;  // n with empirical_p - radius > b_n
    Verdict verdict = Verdict::insufficient_data;
};

/// Trend check of sum a_n = infinity, sum b_n < infinity, and p_n <= b_n on
/// the first `horizon` terms. A diagnostic, not a proof.
CriterionReport check_criterion(const CompletenessCriterion& criterion, std::size_t horizon,
                                double trend_tolerance = 0.05);

}  // namespace flowlab::bc
