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
#include <vector>

#include "flowlab/profile.hpp"

namespace flowlab::coeff {

enum class LadderRule { geometric_super, explicit_list };

/// Integer oscillation frequencies a_0 = 1 < a_1 < ... with strictly
/// increasing ratios a_{i+1}/a_i.
class FrequencyLadder {
  public:
    /// a_i = i! * 2^i for every a_i <= a_max.
    static FrequencyLadder geometric_super(double a_max);
    static FrequencyLadder explicit_list(std::vector<std::int64_t> values);

    std::int64_t operator[](std::size_t i) const { return values_.at(i); }
    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<std::int64_t>& values() const noexcept { return values_; }
    LadderRule rule() const noexcept { return rule_; }

  private:
    FrequencyLadder(std::vector<std::int64_t> values, LadderRule rule);

    std::vector<std::int64_t> values_;
    LadderRule rule_;
};

/// Horizontal strip partition per level: level n splits [0, 1] into
/// M_n = N_0 * ... * N_n strips.
class StripLayout {
  public:
    StripLayout(std::vector<std::int64_t> strips_per_level, double blend_width);

    std::size_t levels() const noexcept { return n_.size(); }
    std::int64_t strips(std::size_t level) const { return n_.at(level); }
    std::int64_t cumulative(std::size_t level) const { return m_.at(level); }
    const std::vector<std::int64_t>& strips() const noexcept { return n_; }
    double blend_width() const noexcept { return blend_width_; }

  private:
    std::vector<std::int64_t> n_;
    std::vector<std::int64_t> m_;
    double blend_width_;
};

enum class StripKind { even_core, odd_blend };

struct StripInfo {
    std::int64_t index;
    StripKind kind;
    // Frequency index i = (index mod N_n) / 2; meaningful for even strips.
    std::int64_t frequency_index;
};

/// Strip containing y at `level`; y must lie in [0, 1].
StripInfo strip_of(double y, std::size_t level, const StripLayout& layout);

enum class Variant { one_driver, two_driver };

/// Diffusion coefficients at a point. `s2` is zero for the one-driver field.
struct Vol {
    double s1 = 0.0;
    double s2 = 0.0;
};

//---------------------------------------------------------------------------//
/*!
 * The strip coefficient field sigma(x, y) on R x [0, 1].
 *
 * For x <= 0 and for levels beyond the configured layout the field is
 * H(x). On [n, n+1] the even strips carry H(a_i x); odd strips blend their
 * two even neighbours with a C-infinity step across the central
 * `blend_width` fraction of the strip and copy the nearer neighbour
 * elsewhere. y outside [0, 1] is clamped. In the two-driver variant the
 * blend is taken on sigma_1 and sigma_2 = sqrt(1 - sigma_1^2).
 */
class CoefficientField {
  public:
    CoefficientField(PeriodicProfile profile, FrequencyLadder ladder, StripLayout layout,
                     Variant variant = Variant::one_driver);

    Vol eval(double x, double y) const noexcept;
    /// sigma_1 only; shorthand for the one-driver field.
    double operator()(double x, double y) const noexcept { return eval(x, y).s1; }

    /// Coefficient on the even strip with frequency index `i`:
    /// H(a_i z) (and its complement for two drivers).
    Vol strip_value(std::size_t i, double z) const noexcept;
    /// Floor profile value H(z) (x <= 0 rule).
    Vol floor_value(double z) const noexcept;

    const PeriodicProfile& profile() const noexcept { return profile_; }
    const FrequencyLadder& ladder() const noexcept { return ladder_; }
    const StripLayout& layout() const noexcept { return layout_; }
    Variant variant() const noexcept { return variant_; }
    int drivers() const noexcept { return variant_ == Variant::two_driver ? 2 : 1; }

    /// Largest frequency used on levels 0..level (1 if the profile is flat).
    double max_frequency(std::size_t level) const;
    double max_frequency() const;

  private:
    Vol from_base(double base) const noexcept;
    double level_value(std::size_t level, double x, double y) const noexcept;

    PeriodicProfile profile_;
    FrequencyLadder ladder_;
    StripLayout layout_;
    Variant variant_;
};

struct RangeViolation {
    double x;
    double y;
    double value;
};

struct ValidationReport {
    std::vector<RangeViolation> range_violations;
    std::vector<RangeViolation> glue_violations;
    double max_slope = 0.0;
    // Bound max frequency * Lipschitz(H) against which max_slope is judged.
    double slope_bound = 0.0;
    // max |sigma_1^2 + sigma_2^2 - 1|; zero for the one-driver field.
    double max_unit_norm_error = 0.0;
    std::size_t points = 0;

    bool clean() const noexcept {
        return range_violations.empty() && glue_violations.empty() &&
               max_slope <= slope_bound && max_unit_norm_error <= 1e-12;
    }
};

/// Samples the field on x in [-1, levels + 1] (resolution points per unit)
/// and y in [0, 1] (resolution points per finest strip, capped).
ValidationReport validate_field(const CoefficientField& field, int resolution);

std::string to_json(const ValidationReport& report);

}  // namespace flowlab::coeff
