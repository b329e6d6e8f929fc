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

#include "flowlab/field.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "flowlab/errors.hpp"

namespace flowlab::coeff {

//---------------------------------------------------------------------------//
// FrequencyLadder
//---------------------------------------------------------------------------//

FrequencyLadder::FrequencyLadder(std::vector<std::int64_t> values, LadderRule rule)
    : values_(std::move(values)), rule_(rule) {
    if (values_.empty() || values_.front() != 1) {
        throw ParameterError("frequency ladder must start with a_0 = 1");
    }
    for (std::size_t i = 1; i < values_.size(); ++i) {
        if (values_[i] <= values_[i - 1]) {
            throw ParameterError("frequency ladder must be strictly increasing");
        }
    }
    // Cross-multiplied ratio test: a_{i+1}/a_i > a_i/a_{i-1}.
    for (std::size_t i = 1; i + 1 < values_.size(); ++i) {
        const long double lhs = static_cast<long double>(values_[i + 1]) * values_[i - 1];
        const long double rhs = static_cast<long double>(values_[i]) * values_[i];
        if (!(lhs > rhs)) {
            throw ParameterError("frequency ladder ratios a_{i+1}/a_i must strictly increase (index " +
                                 std::to_string(i) + ")");
        }
    }
}

FrequencyLadder FrequencyLadder::geometric_super(double a_max) {
    if (!(a_max >= 1.0)) throw ParameterError("ladder a_max must be >= 1");
    std::vector<std::int64_t> values{1};
    std::int64_t a = 1;
    for (std::int64_t i = 1;; ++i) {
        // a_i = a_{i-1} * 2i  ==  i! 2^i
        if (static_cast<long double>(a) * 2 * i > a_max) break;
        a *= 2 * i;
        values.push_back(a);
    }
    return {std::move(values), LadderRule::geometric_super};
}

FrequencyLadder FrequencyLadder::explicit_list(std::vector<std::int64_t> values) {
    return {std::move(values), LadderRule::explicit_list};
}

//---------------------------------------------------------------------------//
// StripLayout
//---------------------------------------------------------------------------//

StripLayout::StripLayout(std::vector<std::int64_t> strips_per_level, double blend_width)
    : n_(std::move(strips_per_level)), blend_width_(blend_width) {
    if (n_.empty()) throw ParameterError("strip layout needs at least one level");
    if (!(blend_width_ > 0.0 && blend_width_ < 0.5)) {
        throw ParameterError("blend_width must lie in (0, 1/2)");
    }
    std::int64_t m = 1;
    for (std::size_t i = 0; i < n_.size(); ++i) {
        if (n_[i] < 2 || n_[i] % 2 != 0) {
            throw ParameterError("strip count N_" + std::to_string(i) + " must be even and >= 2");
        }
        if (m > (std::int64_t{1} << 52) / n_[i]) {
            throw ParameterError("cumulative strip count M_n exceeds 2^52");
        }
        m *= n_[i];
        m_.push_back(m);
    }
}

StripInfo strip_of(double y, std::size_t level, const StripLayout& layout) {
    if (!(y >= 0.0 && y <= 1.0)) {
        throw DomainError("strip_of: y = " + std::to_string(y) + " outside [0, 1]");
    }
    if (level >= layout.levels()) {
        throw ParameterError("strip_of: layout defines no level " + std::to_string(level));
    }
    const std::int64_t m = layout.cumulative(level);
    auto j = static_cast<std::int64_t>(std::floor(y * static_cast<double>(m)));
    j = std::clamp<std::int64_t>(j, 0, m - 1);
    const std::int64_t n = layout.strips(level);
    if (j % 2 == 0) return {j, StripKind::even_core, (j % n) / 2};
    return {j, StripKind::odd_blend, -1};
}

//---------------------------------------------------------------------------//
// CoefficientField
//---------------------------------------------------------------------------//

CoefficientField::CoefficientField(PeriodicProfile profile, FrequencyLadder ladder,
                                   StripLayout layout, Variant variant)
    : profile_(std::move(profile)),
      ladder_(std::move(ladder)),
      layout_(std::move(layout)),
      variant_(variant) {
    for (std::size_t n = 0; n < layout_.levels(); ++n) {
        const auto needed = static_cast<std::size_t>(layout_.strips(n) / 2);
        if (needed > ladder_.size()) {
            throw ParameterError("level " + std::to_string(n) + " needs " + std::to_string(needed) +
                                 " frequencies but the ladder has " +
                                 std::to_string(ladder_.size()));
        }
    }
    if (variant_ == Variant::two_driver) {
        if (profile_.is_complement() || profile_.base_upper() >= 1.0) {
            throw ParameterError("two-driver field needs a base profile with upper < 1");
        }
    }
}

Vol CoefficientField::from_base(double base) const noexcept {
    if (variant_ == Variant::one_driver) return {base, 0.0};
    return {base, std::sqrt(std::max(0.0, 1.0 - base * base))};
}

Vol CoefficientField::strip_value(std::size_t i, double z) const noexcept {
    return from_base(profile_(static_cast<double>(ladder_.values()[i]) * z));
}

Vol CoefficientField::floor_value(double z) const noexcept { return from_base(profile_(z)); }

double CoefficientField::level_value(std::size_t level, double x, double y) const noexcept {
    const std::int64_t m = layout_.cumulative(level);
    const std::int64_t n = layout_.strips(level);
    const double pos = y * static_cast<double>(m);
    auto j = static_cast<std::int64_t>(std::floor(pos));
    j = std::clamp<std::int64_t>(j, 0, m - 1);
    const auto even_value = [&](std::int64_t strip) {
        const auto i = static_cast<std::size_t>((strip % n) / 2);
        return profile_(static_cast<double>(ladder_.values()[i]) * x);
    };
    if (j % 2 == 0) return even_value(j);

    const double below = even_value(j - 1);
    if (j + 1 >= m) return below;
    const double above = even_value(j + 1);
    const double bw = layout_.blend_width();
    const double w = (pos - static_cast<double>(j) - 0.5 * (1.0 - bw)) / bw;
    const double s = smooth_step(w);
    return (1.0 - s) * below + s * above;
}

Vol CoefficientField::eval(double x, double y) const noexcept {
    y = std::clamp(y, 0.0, 1.0);
    if (x <= 0.0) return floor_value(x);
    const double level = std::floor(x);
    if (level >= static_cast<double>(layout_.levels())) return floor_value(x);
    return from_base(level_value(static_cast<std::size_t>(level), x, y));
}

double CoefficientField::max_frequency(std::size_t level) const {
    std::int64_t a = 1;
    const std::size_t top = std::min(level + 1, layout_.levels());
    for (std::size_t l = 0; l < top; ++l) {
        a = std::max(a, ladder_.values()[static_cast<std::size_t>(layout_.strips(l) / 2 - 1)]);
    }
    return static_cast<double>(a);
}

double CoefficientField::max_frequency() const { return max_frequency(layout_.levels() - 1); }

//---------------------------------------------------------------------------//
// Validation
//---------------------------------------------------------------------------//

ValidationReport validate_field(const CoefficientField& field, int resolution) {
    if (resolution < 10) throw ParameterError("validate_field: resolution must be >= 10");
    ValidationReport report;
    const auto& layout = field.layout();
    const auto levels = static_cast<int>(layout.levels());
    const std::int64_t finest = layout.cumulative(layout.levels() - 1);
    const std::int64_t ny = std::max<std::int64_t>(resolution, std::min<std::int64_t>(8 * finest, 4096));
    const int nx = (levels + 2) * resolution;
    const double hx = 1.0 / resolution;
    const double h0 = field.floor_value(0.0).s1;
    constexpr std::size_t kMaxListed = 64;

    report.slope_bound = field.max_frequency() * field.profile().lipschitz_estimate() * (1.0 + 1e-6);
    for (std::int64_t iy = 0; iy <= ny; ++iy) {
        const double y = static_cast<double>(iy) / static_cast<double>(ny);
        Vol prev = field.eval(-1.0, y);
        for (int ix = 0; ix <= nx; ++ix) {
            const double x = static_cast<double>(ix - resolution) / resolution;
            const Vol v = field.eval(x, y);
            ++report.points;
            const double comps[2] = {v.s1, v.s2};
            for (int d = 0; d < field.drivers(); ++d) {
                if (!(comps[d] >= 0.5 && comps[d] <= 1.0) &&
                    report.range_violations.size() < kMaxListed) {
                    report.range_violations.push_back({x, y, comps[d]});
                }
            }
            if (field.drivers() == 2) {
                report.max_unit_norm_error =
                    std::max(report.max_unit_norm_error, std::abs(v.s1 * v.s1 + v.s2 * v.s2 - 1.0));
            }
            if (ix % resolution == 0 && std::abs(v.s1 - h0) > 1e-12 &&
                report.glue_violations.size() < kMaxListed) {
                report.glue_violations.push_back({x, y, v.s1});
            }
            if (ix > 0) {
                report.max_slope = std::max(report.max_slope, std::abs(v.s1 - prev.s1) / hx);
            }
            prev = v;
        }
    }
    return report;
}

std::string to_json(const ValidationReport& report) {
    const auto list = [](const std::vector<RangeViolation>& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : v) arr.push_back({{"x", p.x}, {"y", p.y}, {"value", p.value}});
        return arr;
    };
    nlohmann::ordered_json j;
    j["range_violations"] = list(report.range_violations);
    j["glue_violations"] = list(report.glue_violations);
    j["max_slope"] = report.max_slope;
    j["slope_bound"] = report.slope_bound;
    j["max_unit_norm_error"] = report.max_unit_norm_error;
    j["points"] = report.points;
    return j.dump(2);
}

}  // namespace flowlab::coeff
