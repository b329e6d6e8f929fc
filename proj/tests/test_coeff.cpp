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
#include <random>

#include "doctest.h"

#include "flowlab/errors.hpp"
#include "flowlab/field.hpp"
#include "flowlab/profile.hpp"

using namespace flowlab;
using namespace flowlab::coeff;

namespace {

CoefficientField default_field(Variant v = Variant::one_driver, double upper = 1.0) {
    return CoefficientField(PeriodicProfile::flat_point(0.5, upper),
                            FrequencyLadder::geometric_super(1000.0), StripLayout({2, 4, 6, 8}, 0.25),
                            v);
}

}  // namespace

TEST_CASE("flat point profile values") {
    const auto h = PeriodicProfile::flat_point(0.5, 1.0);
    CHECK(h(0.0) == 0.5);
    CHECK(h(0.5) == 1.0);
    const long double phi = std::exp(4.0L - 1.0L / (0.25L * 0.75L));
    CHECK(h(0.25) == doctest::Approx(static_cast<double>(0.5L + 0.5L * phi)).epsilon(1e-15));
    CHECK(h(1.25) == doctest::Approx(h(0.25)).epsilon(1e-15));
    CHECK_THROWS_AS(PeriodicProfile::flat_point(0.4, 1.0), ParameterError);
    CHECK_THROWS_AS(PeriodicProfile::flat_point(0.8, 0.7), ParameterError);
    CHECK_THROWS_AS(PeriodicProfile::flat_point(0.5, 1.1), ParameterError);
    CHECK(h.conformant());
}

TEST_CASE("ladder") {
    const auto l = FrequencyLadder::geometric_super(1000.0);
    REQUIRE(l.size() == 5);
    CHECK(l[0] == 1);
    CHECK(l[1] == 2);
    CHECK(l[2] == 8);
    CHECK(l[3] == 48);
    CHECK(l[4] == 384);
    CHECK_THROWS_AS(FrequencyLadder::explicit_list({1, 2, 4}), ParameterError);  // equal ratios
    CHECK_THROWS_AS(FrequencyLadder::explicit_list({2, 6}), ParameterError);
    CHECK(FrequencyLadder::explicit_list({1, 2, 5}).size() == 3);
}

TEST_CASE("strip_of examples") {
    const StripLayout one({4}, 0.25);
    auto s = strip_of(0.0, 0, one);
    CHECK(s.index == 0);
    CHECK(s.kind == StripKind::even_core);
    CHECK(s.frequency_index == 0);
    s = strip_of(0.3, 0, one);
    CHECK(s.index == 1);
    CHECK(s.kind == StripKind::odd_blend);
    const StripLayout two({4, 6}, 0.25);
    s = strip_of(0.13, 1, two);
    CHECK(s.index == 3);
    CHECK(s.kind == StripKind::odd_blend);
    CHECK_THROWS_AS(strip_of(1.01, 0, one), DomainError);
    CHECK_THROWS_AS(strip_of(-0.1, 0, one), DomainError);
}

TEST_CASE("strip_of agrees with interval enumeration") {
    const StripLayout layout({2, 4, 6, 8}, 0.25);
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> uy(0.0, 1.0);
    std::uniform_int_distribution<int> un(0, 3);
    for (int trial = 0; trial < 10000; ++trial) {
        const double y = uy(gen);
        const auto n = static_cast<std::size_t>(un(gen));
        const std::int64_t m = layout.cumulative(n);
        std::int64_t found = -1;
        for (std::int64_t j = 0; j < m; ++j) {
            const double lo = static_cast<double>(j) / static_cast<double>(m);
            const double hi = static_cast<double>(j + 1) / static_cast<double>(m);
            if (y >= lo && y < hi) {
                found = j;
                break;
            }
        }
        const auto s = strip_of(y, n, layout);
        REQUIRE(s.index == found);
        CHECK((s.kind == StripKind::even_core) == (found % 2 == 0));
        if (found % 2 == 0) CHECK(s.frequency_index == (found % layout.strips(n)) / 2);
    }
}

TEST_CASE("sigma examples") {
    const auto f = default_field();
    const auto& h = f.profile();
    CHECK(f(-3.7, 0.42) == doctest::Approx(h(0.3)).epsilon(1e-12));
    for (double y : {0.0, 0.1, 0.37, 0.6, 0.99, 1.0}) CHECK(f(2.0, y) == h(0.0));
    CHECK(f(1.5, 0.0) == doctest::Approx(h(0.5)).epsilon(1e-15));
    CHECK(f(1.5, 0.0) == 1.0);
}

TEST_CASE("even strip is periodic with period 1/a_i") {
    const auto f = default_field();
    // level 1 has M_1 = 8 strips; strip 2 is even with frequency index 1 (a_1 = 2)
    const double y = 2.5 / 8.0;
    const auto s = strip_of(y, 1, f.layout());
    REQUIRE(s.kind == StripKind::even_core);
    const double a = static_cast<double>(f.ladder()[static_cast<std::size_t>(s.frequency_index)]);
    for (double x = 1.05; x + 1.0 / a < 2.0; x += 0.037) {
        CHECK(f(x, y) == doctest::Approx(f(x + 1.0 / a, y)).epsilon(1e-12));
        CHECK(f(x, y) == doctest::Approx(f.profile()(a * x)).epsilon(1e-12));
    }
}

TEST_CASE("range holds on a dense grid") {
    const auto f = default_field();
    for (int i = 0; i <= 2000; ++i) {
        const double x = -1.0 + 6.0 * i / 2000.0;
        for (int j = 0; j <= 97; ++j) {
            const double v = f(x, j / 97.0);
            REQUIRE(v >= 0.5);
            REQUIRE(v <= 1.0);
        }
    }
}

TEST_CASE("validate_field") {
    const auto good = validate_field(default_field(), 100);
    CHECK(good.range_violations.empty());
    CHECK(good.glue_violations.empty());
    CHECK(good.clean());

    std::vector<double> samples(64);
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = 0.6 + 0.6 * std::sin(0.1 * i) * std::sin(0.1 * i);
    const CoefficientField bad(PeriodicProfile::table(samples), FrequencyLadder::geometric_super(1000.0),
                               StripLayout({2, 4}, 0.25));
    const auto r = validate_field(bad, 100);
    CHECK_FALSE(r.range_violations.empty());
    CHECK_FALSE(r.clean());

    const auto two = validate_field(default_field(Variant::two_driver, 0.9), 100);
    CHECK(two.max_unit_norm_error <= 1e-12);
    CHECK_THROWS_AS(validate_field(default_field(), 5), ParameterError);
}

TEST_CASE("two-driver field has unit norm") {
    const auto f = default_field(Variant::two_driver, 0.9);
    for (int i = 0; i < 500; ++i) {
        const double x = -0.5 + 4.5 * i / 500.0;
        const auto v = f.eval(x, std::fmod(0.6180339887 * i, 1.0));
        CHECK(std::abs(v.s1 * v.s1 + v.s2 * v.s2 - 1.0) <= 1e-12);
    }
    CHECK_THROWS_AS(default_field(Variant::two_driver, 1.0), ParameterError);
}
