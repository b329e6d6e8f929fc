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

#include "flowlab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flowlab/errors.hpp"

namespace flowlab::coeff {

std::string_view to_string(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::flat_point_bump: return "flat_point_bump";
        case ProfileKind::raised_cosine: return "raised_cosine";
        case ProfileKind::custom_table: return "custom_table";
    }
    return "unknown";
}

ProfileKind profile_kind_from_string(std::string_view name) {
    if (name == "flat_point_bump") return ProfileKind::flat_point_bump;
    if (name == "raised_cosine") return ProfileKind::raised_cosine;
    if (name == "custom_table") return ProfileKind::custom_table;
    throw ParameterError("unknown profile kind '" + std::string(name) + "'");
}

double flat_bump(double s) noexcept {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return std::exp(4.0 - 1.0 / (s * (1.0 - s)));
}

double smooth_step(double w) noexcept {
    if (w <= 0.0) return 0.0;
    if (w >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / w);
    const double b = std::exp(-1.0 / (1.0 - w));
    return a / (a + b);
}

namespace {

double frac(double x) noexcept {
    const double f = x - std::floor(x);
    return f >= 1.0 ? 0.0 : f;
}

void check_range(double lower, double upper) {
    if (!(lower >= 0.5 && lower < upper && upper <= 1.0)) {
        throw ParameterError("profile range must satisfy 1/2 <= lower < upper <= 1, got [" +
                             std::to_string(lower) + ", " + std::to_string(upper) + "]");
    }
}

}  // namespace

PeriodicProfile::PeriodicProfile(ProfileKind kind, double lower, double upper,
                                 std::vector<double> samples)
    : kind_(kind), lower_(lower), upper_(upper), samples_(std::move(samples)) {}

PeriodicProfile PeriodicProfile::flat_point(double lower, double upper) {
    check_range(lower, upper);
    return {ProfileKind::flat_point_bump, lower, upper, {}};
}

PeriodicProfile PeriodicProfile::raised_cosine(double lower, double upper) {
    check_range(lower, upper);
    return {ProfileKind::raised_cosine, lower, upper, {}};
}

PeriodicProfile PeriodicProfile::table(std::vector<double> samples) {
    if (samples.empty()) throw ParameterError("custom_table profile needs at least one sample");
    for (double v : samples) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw ParameterError("custom_table samples must be finite and positive");
        }
    }
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    const double lower = *lo;
    const double upper = *hi;
    return {ProfileKind::custom_table, lower, upper, std::move(samples)};
}

PeriodicProfile PeriodicProfile::complement() const {
    if (complement_) throw ParameterError("profile is already a complement");
    if (upper_ >= 1.0) {
        throw ParameterError("complement needs base profile strictly below 1");
    }
    PeriodicProfile out = *this;
    out.complement_ = true;
    return out;
}

PeriodicProfile make_flat_point_profile(double lower, double upper) {
    return PeriodicProfile::flat_point(lower, upper);
}

double PeriodicProfile::operator()(double x) const noexcept {
    const double s = frac(x);
    double base = 0.0;
    switch (kind_) {
        case ProfileKind::flat_point_bump:
            base = lower_ + (upper_ - lower_) * flat_bump(s);
            break;
        case ProfileKind::raised_cosine:
            base = lower_ + (upper_ - lower_) * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * s));
            break;
        case ProfileKind::custom_table: {
            const auto n = samples_.size();
            if (n == 1) {
                base = samples_[0];
                break;
            }
            const double pos = s * static_cast<double>(n);
            auto i = static_cast<std::size_t>(pos);
            if (i >= n) i = n - 1;
            const double w = pos - static_cast<double>(i);
            base = (1.0 - w) * samples_[i] + w * samples_[(i + 1) % n];
            break;
        }
    }
    if (complement_) return std::sqrt(std::max(0.0, 1.0 - base * base));
    return base;
}

double PeriodicProfile::lower() const noexcept {
    return complement_ ? std::sqrt(1.0 - upper_ * upper_) : lower_;
}

double PeriodicProfile::upper() const noexcept {
    return complement_ ? std::sqrt(1.0 - lower_ * lower_) : upper_;
}

bool PeriodicProfile::is_constant() const noexcept { return lower_ == upper_; }

double PeriodicProfile::sampled_oscillation(int resolution) const {
    double lo = (*this)(0.0);
    double hi = lo;
    for (int i = 1; i < resolution; ++i) {
        const double v = (*this)(static_cast<double>(i) / resolution);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

double PeriodicProfile::lipschitz_estimate(int resolution) const {
    const double h = 1.0 / resolution;
    double best = 0.0;
    double prev = (*this)(0.0);
    for (int i = 1; i <= resolution; ++i) {
        const double v = (*this)(i * h);
        best = std::max(best, std::abs(v - prev) / h);
        prev = v;
    }
    return best;
}

bool PeriodicProfile::conformant() const {
    return lower() >= 0.5 && upper() <= 1.0 && sampled_oscillation() >= 1e-3;
}

}  // namespace flowlab::coeff
