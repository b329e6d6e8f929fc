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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowlab::coeff {

enum class ProfileKind { flat_point_bump, raised_cosine, custom_table };

std::string_view to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(std::string_view name);

/// C-infinity bump on (0, 1), exp(4 - 1/(s(1-s))), zero at the endpoints
/// together with all derivatives; peaks at 1 for s = 1/2.
double flat_bump(double s) noexcept;

/// Smooth step on [0, 1] built from exp(-1/t); 0 below, 1 above, all
/// derivatives vanish at both ends.
double smooth_step(double w) noexcept;

//---------------------------------------------------------------------------//
/*!
 * A smooth scalar function of period one.
 *
 * `lower` and `upper` are the certified range. A profile may be marked as
 * the unit-norm complement of its base, in which case it evaluates to
 * sqrt(1 - base(x)^2); this is how the two-driver pair with
 * H1^2 + H2^2 = 1 is represented.
 */
class PeriodicProfile {
  public:
    /// H(x) = lower + (upper - lower) * flat_bump(x mod 1).
    static PeriodicProfile flat_point(double lower, double upper);
    /// H(x) = lower + (upper - lower) * (1 - cos 2 pi x) / 2.
    static PeriodicProfile raised_cosine(double lower, double upper);
    /// Periodic piecewise-linear interpolation of uniform samples on [0, 1).
    static PeriodicProfile table(std::vector<double> samples);
    static PeriodicProfile constant(double value) { return table({value}); }

    PeriodicProfile complement() const;

    double operator()(double x) const noexcept;

    ProfileKind kind() const noexcept { return kind_; }
    bool is_complement() const noexcept { return complement_; }
    // Range of the base profile (before any complement transform).
    double base_lower() const noexcept { return lower_; }
    double base_upper() const noexcept { return upper_; }
    // Range of the evaluated profile.
    double lower() const noexcept;
    double upper() const noexcept;
    const std::vector<double>& samples() const noexcept { return samples_; }

    bool is_constant() const noexcept;
    /// Sampled max - min; non-constant profiles need at least 1e-3.
    double sampled_oscillation(int resolution = 4096) const;
    /// Sampled Lipschitz constant max |H(x+h) - H(x)| / h.
    double lipschitz_estimate(int resolution = 1 << 14) const;

    /// Range [1/2, 1] and non-constant, as required of the strip profile.
    bool conformant() const;

  private:
    PeriodicProfile(ProfileKind kind, double lower, double upper, std::vector<double> samples);

    ProfileKind kind_;
    double lower_;
    double upper_;
    std::vector<double> samples_;
    bool complement_ = false;
};

/// Shorthand for the default strip profile.
PeriodicProfile make_flat_point_profile(double lower, double upper);

/// H1 together with an optional H2. A missing H2 means H2 = 0.
struct ProfilePair {
    PeriodicProfile h1;
    std::optional<PeriodicProfile> h2;

    double sum_of_squares(double y) const noexcept {
        const double a = h1(y);
        const double b = h2 ? (*h2)(y) : 0.0;
        return a * a + b * b;
    }
    int drivers() const noexcept { return h2 ? 2 : 1; }
};

}  // namespace flowlab::coeff
