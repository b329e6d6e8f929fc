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

#include <cmath>

#include "doctest.h"

#include "flowlab/errors.hpp"
#include "flowlab/homog.hpp"

using namespace flowlab;
using namespace flowlab::homog;

namespace {

// Midpoint Riemann sum on [0, 1] in long double.
template <class F>
double riemann(F f, int n = 1000000) {
    long double acc = 0.0L;
    for (int i = 0; i < n; ++i) acc += static_cast<long double>(f((i + 0.5) / n));
    return static_cast<double>(acc / n);
}

ProfilePair bump_pair() { return {PeriodicProfile::flat_point(0.5, 1.0), std::nullopt}; }

ProfilePair unit_pair() {
    const auto h1 = PeriodicProfile::flat_point(0.5, 0.9);
    return {h1, h1.complement()};
}

SolutionPath linear_path(std::size_t steps, double dt, double slope) {
    SolutionPath p;
    p.dt = dt;
    for (std::size_t k = 0; k <= steps; ++k) p.states.push_back(slope * dt * static_cast<double>(k));
    return p;
}

}  // namespace

TEST_CASE("invariant normalizer") {
    CHECK(invariant_normalizer({PeriodicProfile::constant(1.0), std::nullopt}).value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(invariant_normalizer(unit_pair()).value == doctest::Approx(1.0).epsilon(1e-12));
    const auto pair = bump_pair();
    const auto v = invariant_normalizer(pair);
    const double oracle = riemann([&](double y) { return 1.0 / (pair.h1(y) * pair.h1(y)); });
    CHECK(std::abs(v.value - oracle) <= 1e-8);
    CHECK(v.error <= 1e-10);
}

TEST_CASE("simpson rejects nonconvergent input") {
    CHECK_THROWS_AS(simpson([](double y) { return y < 0.3 ? 0.0 : 1.0; }, 1e-12, 8), DomainError);
}

TEST_CASE("mu_average") {
    const auto pair = bump_pair();
    CHECK(mu_average([](double) { return 3.5; }, pair) == doctest::Approx(3.5).epsilon(1e-13));
    const auto v = invariant_normalizer(pair).value;
    CHECK(mu_average([&](double y) { return pair.sum_of_squares(y); }, pair) == doctest::Approx(1.0 / v).epsilon(1e-12));
    const double num = riemann([&](double y) { return 1.0 / pair.h1(y); });
    const double den = riemann([&](double y) { return 1.0 / (pair.h1(y) * pair.h1(y)); });
    CHECK(std::abs(mu_average([&](double y) { return pair.h1(y); }, pair) - num / den) <= 1e-8);
    // linearity
    const double a = mu_average([&](double y) { return std::sin(6.283185307179586 * y); }, pair);
    const double b = mu_average([&](double y) { return pair.h1(y); }, pair);
    const double c = mu_average([&](double y) { return 2.0 * std::sin(6.283185307179586 * y) - pair.h1(y); }, pair);
    CHECK(c == doctest::Approx(2.0 * a - b).epsilon(1e-12));
}

TEST_CASE("effective constants") {
    SUBCASE("constant profile needs the relaxed flag") {
        const ProfilePair c{PeriodicProfile::constant(0.7), std::nullopt};
        CHECK_THROWS_AS(effective_constants(c), ParameterError);
        const auto s = effective_constants(c, true);
        CHECK(s.beta1 == doctest::Approx(0.7).epsilon(1e-13));
        CHECK(s.alpha_hat == doctest::Approx(0.7).epsilon(1e-13));
        CHECK(s.beta_hat <= 1e-6);
    }
    SUBCASE("unit-norm pair") {
        const auto s = effective_constants(unit_pair());
        CHECK(std::abs(s.beta1 - 1.0) <= 1e-10);
        CHECK(std::abs(s.alpha_hat * s.alpha_hat + s.beta_hat * s.beta_hat - 1.0) <= 1e-10);
        CHECK(s.beta_hat > 0.0);
    }
    SUBCASE("flat point bump against the Riemann oracle") {
        const auto pair = bump_pair();
        const auto s = effective_constants(pair);
        const double v = riemann([&](double y) { return 1.0 / (pair.h1(y) * pair.h1(y)); });
        const double m1 = riemann([&](double y) { return 1.0 / pair.h1(y); });
        CHECK(std::abs(s.v - v) <= 1e-8);
        CHECK(std::abs(s.beta1 - 1.0 / std::sqrt(v)) <= 1e-8);
        CHECK(std::abs(s.alpha_hat - m1 / v) <= 1e-8);
        CHECK(std::abs(s.alpha_hat * s.alpha_hat + s.beta_hat * s.beta_hat - s.beta1 * s.beta1) <= 1e-9);
        CHECK(s.beta1 > s.alpha_hat);
        CHECK(s.beta_hat > 0.0);
    }
}

TEST_CASE("realized quadratic variation") {
    SUBCASE("linear states give sum of dt^2") {
        const auto p = linear_path(1000, 1e-3, 1.0);
        CHECK(realized_qv(p, 1.0) == doctest::Approx(1000 * 1e-6).epsilon(1e-10));
        CHECK_THROWS_AS(realized_qv(p, 1.5), ParameterError);
    }
    SUBCASE("additive noise concentrates around t") {
        const double dt = 1e-4;
        const sde::BrownianPath w(3, dt, 1.0, 1);
        const auto p = sde::integrate_with(sde::ConstantCoefficient{1.0}, 0.0, 0.0, w);
        CHECK(std::abs(realized_qv(p, 1.0) - 1.0) <= 4.0 * std::sqrt(2.0 * dt));
        CHECK(realized_cross_qv(p, p, 1.0) == realized_qv(p, 1.0));
        auto shifted = p;
        for (double& x : shifted.states) x += 3.0;
        CHECK(realized_qv(shifted, 1.0) == doctest::Approx(realized_qv(p, 1.0)).epsilon(1e-12));
    }
    SUBCASE("independent increments have small covariation") {
        const double dt = 1e-4;
        const sde::BrownianPath w(4, dt, 1.0, 2);
        const sde::BrownianPath w2(5, dt, 1.0, 1);
        const auto a = sde::integrate_with(sde::ConstantCoefficient{1.0}, 0.0, 0.0, w);
        const auto b = sde::integrate_with(sde::ConstantCoefficient{1.0}, 0.0, 0.0, w2);
        CHECK(std::abs(realized_cross_qv(a, b, 1.0)) <= 4.0 * std::sqrt(dt));
        CHECK(realized_cross_qv(a, b, 1.0) == realized_cross_qv(b, a, 1.0));
    }
    SUBCASE("grid mismatch") {
        CHECK_THROWS_AS(realized_cross_qv(linear_path(10, 0.1, 1), linear_path(20, 0.05, 1), 1.0), ParameterError);
    }
}

TEST_CASE("ergodic average") {
    const auto pair = bump_pair();
    const double eps = 0.05;
    const double dt = sde::required_dt(1.0 / eps, 0.1);
    const sde::BrownianPath w(12, dt, 1.0, 1);
    const auto p = sde::integrate_with(sde::ScaledProfile{&pair, eps}, 0.0, 0.0, w);
    CHECK(ergodic_average(p, [](double) { return 1.0; }, eps, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    const double h2 = ergodic_average(p, [&](double z) { return pair.h1(z) * pair.h1(z); }, eps, 1.0);
    CHECK(std::abs(h2 - realized_qv(p, 1.0)) <= 5.0 * std::sqrt(2.0 * dt));
    CHECK_THROWS_AS(ergodic_average(p, [](double) { return 1.0; }, 0.0, 1.0), ParameterError);
}

TEST_CASE("ergodic average of H approaches its mu-average") {
    const auto pair = bump_pair();
    const double eps = 0.01;
    EnsembleSpec spec{pair, {eps}, 0.0, 1.0, sde::required_dt(1.0 / eps, 0.1), 31, 100, 0.1};
    const auto stats = run_ensemble(spec);
    std::vector<double> occ;
    for (const auto& s : stats) occ.push_back(s.occupation_h1[0]);
    const double target = mu_average([&](double y) { return pair.h1(y); }, pair);
    CHECK(std::abs(summarize(occ).value - target) <= 0.05 * target);
}

TEST_CASE("rescale_path") {
    const sde::BrownianPath w(1, 1e-3, 1.0, 1);
    const auto p = sde::integrate_with(sde::ConstantCoefficient{1.0}, 0.2, 0.0, w);
    const auto same = rescale_path(p, 1.0);
    CHECK(same.states == p.states);
    CHECK(same.dt == p.dt);
    const auto back = rescale_path(rescale_path(p, 0.25), 4.0);
    for (std::size_t k = 0; k < p.states.size(); ++k) CHECK(back.states[k] == doctest::Approx(p.states[k]).epsilon(1e-14));
    CHECK(back.dt == doctest::Approx(p.dt).epsilon(1e-14));
    CHECK_THROWS_AS(rescale_path(p, 0.0), ParameterError);

    // z(t) = X(t eps^2) / eps for X = W is again standard: Var z(1) = 1.
    const double eps = 0.1;
    std::vector<double> ends;
    for (int s = 0; s < 4000; ++s) {
        const sde::BrownianPath b(derive_seed(2, s), 1e-3, eps * eps, 1);
        const auto z = rescale_path(sde::integrate_with(sde::ConstantCoefficient{1.0}, 0.0, 0.0, b), eps);
        ends.push_back(z.states.back());
        REQUIRE(z.end_time() == doctest::Approx(1.0).epsilon(1e-9));
    }
    double s2 = 0;
    for (double e : ends) s2 += e * e;
    CHECK(std::abs(s2 / 4000.0 - 1.0) <= 4.0 * std::sqrt(2.0 / 4000.0));
}

TEST_CASE("summarize and correlation") {
    const auto e = summarize({1.0, 2.0, 3.0, 4.0});
    CHECK(e.value == 2.5);
    CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(sample_correlation({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
    CHECK(sample_correlation({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(sample_correlation({1}, {1}), ParameterError);
}

TEST_CASE("ensemble kernel equals the stored-path reference") {
    const auto pair = bump_pair();
    EnsembleSpec spec{pair, {0.2, 0.1, 0.05}, 0.0, 0.5, sde::required_dt(20.0, 0.1), 8, 6, 0.1};
    const auto ref = reference::run_ensemble_serial(spec);
    for (int threads : {1, 3}) {
        const auto fast = run_ensemble(spec, ExecPolicy{threads});
        REQUIRE(fast.size() == ref.size());
        for (std::size_t p = 0; p < ref.size(); ++p) {
            CHECK(fast[p].qv == ref[p].qv);
            CHECK(fast[p].cross == ref[p].cross);
            CHECK(fast[p].endpoint == ref[p].endpoint);
            for (std::size_t e = 0; e < 3; ++e) {
                CHECK(fast[p].occupation_h1[e] == doctest::Approx(ref[p].occupation_h1[e]).epsilon(1e-12));
            }
        }
    }
    CHECK(pair_index(0, 1, 3) == 0);
    CHECK(pair_index(0, 2, 3) == 1);
    CHECK(pair_index(1, 2, 3) == 2);
}

TEST_CASE("equal epsilons give cross equal to QV") {
    const auto pair = bump_pair();
    EnsembleSpec spec{pair, {0.1, 0.1}, 0.0, 0.5, sde::required_dt(10.0, 0.1), 4, 5, 0.1};
    for (const auto& s : run_ensemble(spec)) {
        CHECK(s.cross[0] == s.qv[0]);
        CHECK(s.qv[0] == s.qv[1]);
    }
}
