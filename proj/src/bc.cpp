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

#include "flowlab/bc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "flowlab/errors.hpp"
#include "flowlab/rng.hpp"

namespace flowlab::bc {

EventProfile::EventProfile(std::vector<double> p, std::size_t m) : p_(std::move(p)), m_(m) {
    if (p_.empty()) throw ParameterError("event profile needs at least one event");
    for (double q : p_) {
        if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("event probabilities must lie in [0, 1]");
    }
    if (m_ < 1 || m_ > p_.size()) throw ParameterError("threshold M must satisfy 1 <= M <= N");
}

double EventProfile::total() const noexcept {
    double s = 0.0;
    for (double q : p_) s += q;
    return s;
}

double bc_upper(const EventProfile& profile) {
    return profile.total() / static_cast<double>(profile.m());
}

double bc_lower(const EventProfile& profile) {
    const auto n = static_cast<double>(profile.n());
    const auto m = static_cast<double>(profile.m());
    return (profile.total() - m + 1.0) / (n - m + 1.0);
}

namespace {

double enumerate_at_least(const std::vector<double>& p, std::size_t m) {
    const std::size_t n = p.size();
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) < m) continue;
        double prob = 1.0;
        for (std::size_t i = 0; i < n; ++i) prob *= (mask >> i) & 1u ? p[i] : 1.0 - p[i];
        total += prob;
    }
    return total;
}

double poisson_binomial_at_least(const std::vector<double>& p, std::size_t m) {
    // dist[c] = P(exactly c of the events processed so far)
    std::vector<double> dist(p.size() + 1, 0.0);
    dist[0] = 1.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t c = i + 1; c > 0; --c) dist[c] = dist[c] * (1.0 - p[i]) + dist[c - 1] * p[i];
        dist[0] *= 1.0 - p[i];
    }
    double tail = 0.0;
    for (std::size_t c = p.size() + 1; c-- > m;) tail += dist[c];
    return tail;
}

}  // namespace

double exact_at_least(const std::vector<double>& p, std::size_t m, ExactMethod method) {
    for (double q : p) {
        if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("event probabilities must lie in [0, 1]");
    }
    if (m == 0) return 1.0;
    if (m > p.size()) return 0.0;
    switch (method) {
        case ExactMethod::enumeration:
            if (p.size() > 24) {
                throw CapacityError("exact_at_least: enumeration limited to N <= 24, got N = " +
                                    std::to_string(p.size()));
            }
            return enumerate_at_least(p, m);
        case ExactMethod::poisson_binomial: return poisson_binomial_at_least(p, m);
        case ExactMethod::automatic:
            return p.size() <= 16 ? enumerate_at_least(p, m) : poisson_binomial_at_least(p, m);
    }
    return 0.0;
}

double exact_at_least(const EventProfile& profile, ExactMethod method) {
    return exact_at_least(profile.p(), profile.m(), method);
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double p0(double a, double t, double alpha) {
    if (!(a >= 0.0 && t > 0.0 && alpha > 0.0)) throw ParameterError("p0: need a >= 0, t > 0, alpha > 0");
    return std::erfc(a / std::sqrt(2.0 * alpha * t));
}

double q0(double a, double t, double beta) {
    if (!(a >= 0.0 && t > 0.0 && beta > 0.0)) throw ParameterError("q0: need a >= 0, t > 0, beta > 0");
    return std::erf(a / std::sqrt(2.0 * beta * t));
}

double PassagePlan::product() const { return q0(delta, u * T, beta) * p0(2.0 * delta, T / 2.0, alpha); }

PassagePlan plan_corollary(double alpha, double beta, double T, double eps, std::int64_t m,
                           const PlanSearch& search) {
    if (!(alpha > 0.0 && alpha <= beta)) throw ParameterError("plan: need 0 < alpha <= beta");
    if (!(T > 0.0)) throw ParameterError("plan: T must be > 0");
    if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("plan: eps must lie in (0, 1)");
    if (m < 1) throw ParameterError("plan: m must be >= 1");

    const double target = 1.0 - eps / 2.0;
    const auto grid = [&](double top, int octaves) {
        std::vector<double> values;
        for (int e = 0; e < octaves; ++e) {
            for (int f = 0; f < search.mantissa_steps; ++f) {
                const double v = std::ldexp(top, -e) * (1.0 + static_cast<double>(f) / search.mantissa_steps);
                if (v <= top) values.push_back(v);
            }
        }
        std::sort(values.begin(), values.end(), std::greater<>());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        return values;
    };
    const std::vector<double> deltas = grid(search.delta_max, search.delta_octaves);
    const std::vector<double> us = grid(0.5, search.u_octaves);  // descending

    PassagePlan best{alpha, beta, T, eps, m, 0.0, 0.0, 0, 0};
    double best_product = 0.0;
    for (double delta : deltas) {
        PassagePlan trial = best;
        trial.delta = delta;
        // product is decreasing in u; find the first (largest) feasible u
        std::size_t lo = 0;
        std::size_t hi = us.size();
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            trial.u = us[mid];
            if (trial.product() >= target) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if (lo == us.size()) {
            trial.u = us.back();
            best_product = std::max(best_product, trial.product());
            continue;
        }
        trial.u = us[lo];
        if (trial.u > best.u || (trial.u == best.u && delta > best.delta)) best = trial;
    }
    if (best.u == 0.0) {
        std::ostringstream msg;
        msg << "plan: no (delta, u) on the dyadic grid reaches q0 * p0 >= " << target
            << " (best product " << best_product << " for alpha=" << alpha << ", beta=" << beta
            << ", T=" << T << ", eps=" << eps << ")";
        throw InfeasibleError(msg.str());
    }
    best.k = static_cast<std::int64_t>(std::ceil(static_cast<double>(m) / best.u));
    best.N = 2 * best.k - 2;
    return best;
}

std::string to_json(const PassagePlan& plan) {
    nlohmann::ordered_json j;
    j["alpha"] = plan.alpha;
    j["beta"] = plan.beta;
    j["T"] = plan.T;
    j["eps"] = plan.eps;
    j["m"] = plan.m;
    j["delta"] = plan.delta;
    j["u"] = plan.u;
    j["k"] = plan.k;
    j["N"] = plan.N;
    return j.dump(2);
}

CorollaryValidation validate_corollary(const PassagePlan& plan, std::size_t n_mc,
                                       std::uint64_t seed, const ValidationOptions& opt,
                                       const ExecPolicy& exec) {
    if (plan.N < plan.m || plan.m < 1) throw ParameterError("validate_corollary: invalid plan");
    if (n_mc == 0 || opt.steps == 0 || opt.rate_pieces == 0) {
        throw ParameterError("validate_corollary: n_mc, steps and rate_pieces must be positive");
    }
    const auto n = static_cast<std::size_t>(plan.N);
    const auto need = static_cast<std::size_t>(plan.m);
    const double dt = plan.T / static_cast<double>(opt.steps);
    std::vector<unsigned char> hit(n_mc, 0);

    parallel_for(n_mc, exec, [&](std::size_t r) {
        const CounterRng rng(derive_seed(seed, r));
        std::vector<double> m_val(n, 0.0);
        const auto step_sd = [&](std::size_t i, std::size_t piece) {
            switch (opt.rates) {
                case RateMode::constant_alpha: return std::sqrt(plan.alpha * dt);
                case RateMode::constant_beta: return std::sqrt(plan.beta * dt);
                case RateMode::random_piecewise: break;
            }
            const double u = rng.uniform({2u, static_cast<std::uint32_t>(i)}, piece);
            return std::sqrt((plan.alpha + (plan.beta - plan.alpha) * u) * dt);
        };
        std::size_t above = 0;
        for (std::size_t k = 0; k < opt.steps && above < need; ++k) {
            const std::size_t piece = k * opt.rate_pieces / opt.steps;
            for (std::size_t i = 0; i < n; ++i) {
                const bool was = m_val[i] >= plan.delta;
                m_val[i] += step_sd(i, piece) * rng.normal({1u, static_cast<std::uint32_t>(i)}, k);
                const bool now = m_val[i] >= plan.delta;
                if (now && !was) ++above;
                if (!now && was) --above;
            }
        }
        hit[r] = above >= need ? 1 : 0;
    });

    CorollaryValidation out;
    out.runs = n_mc;
    std::size_t successes = 0;
    for (auto h : hit) successes += h;
    out.estimate = static_cast<double>(successes) / static_cast<double>(n_mc);
    constexpr double kZ99 = 2.5758293035489004;
    out.ci_radius = kZ99 * std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(n_mc));
    out.passed = out.estimate + out.ci_radius >= 1.0 - plan.eps;
    return out;
}

//---------------------------------------------------------------------------//

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::consistent: return "consistent";
        case Verdict::inconsistent: return "inconsistent";
        case Verdict::insufficient_data: return "insufficient data";
    }
    return "unknown";
}

CriterionReport check_criterion(const CompletenessCriterion& c, std::size_t horizon,
                                double trend_tolerance) {
    if (c.a.size() < horizon || c.b.size() < horizon) {
        throw ParameterError("check_criterion: sequences shorter than the horizon");
    }
    for (std::size_t i = 0; i < horizon; ++i) {
        if (!(c.a[i] > 0.0 && c.b[i] > 0.0)) {
            throw ParameterError("check_criterion: a_n and b_n must be positive");
        }
    }
    CriterionReport r;
    double sa = 0.0;
    double sb = 0.0;
    for (std::size_t i = 0; i < horizon; ++i) {
        sa += c.a[i];
        sb += c.b[i];
        r.partial_a.push_back(sa);
        r.partial_b.push_back(sb);
    }
    if (horizon < 4) return r;
    const std::size_t half = horizon / 2;
    r.a_tail_growth = (r.partial_a.back() - r.partial_a[half - 1]) / r.partial_a[half - 1];
    r.b_tail_share = (r.partial_b.back() - r.partial_b[half - 1]) / r.partial_b.back();
    r.a_diverging = r.a_tail_growth >= trend_tolerance;
    r.b_summable = r.b_tail_share <= trend_tolerance;

    const std::size_t known = std::min(horizon, c.empirical_p.size());
    for (std::size_t i = 0; i < known; ++i) {
        const double rad = i < c.radius.size() ? c.radius[i] : 0.0;
        if (c.empirical_p[i] - rad > c.b[i]) r.violations.push_back(i);
    }
    if (!r.violations.empty()) {
        r.verdict = Verdict::inconsistent;
    } else if (known == 0 || !r.a_diverging || !r.b_summable) {
        r.verdict = Verdict::insufficient_data;
    } else {
        r.verdict = Verdict::consistent;
    }
    return r;
}

}  // namespace flowlab::bc
