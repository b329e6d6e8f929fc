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

#include "flowlab/brownian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flowlab/errors.hpp"

namespace flowlab::sde {

namespace {

// Stream tags: bridge level d uses tag d; the side channel uses kUniformTag.
constexpr std::uint32_t kUniformTag = 0x55000000u;
constexpr int kSubBlockBits = 12;

}  // namespace

BrownianPath::BrownianPath(std::uint64_t seed, double dt, double horizon, int drivers)
    : seed_(seed), dt_(dt), horizon_(horizon), drivers_(drivers), rng_(seed) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("Brownian path: dt must be > 0");
    if (!(horizon >= dt) || !std::isfinite(horizon)) {
        throw ParameterError("Brownian path: horizon must be >= dt");
    }
    if (drivers != 1 && drivers != 2) throw ParameterError("Brownian path: drivers must be 1 or 2");
    const double ratio = horizon / dt;
    steps_ = static_cast<std::uint64_t>(std::floor(ratio * (1.0 + 1e-12)));
    if (ratio > 9e15) throw ParameterError("Brownian path: too many steps");

    int exponent = 0;
    const double mantissa = std::frexp(dt, &exponent);  // dt = mantissa * 2^exponent
    root_dt_ = 2.0 * mantissa;                          // in [1, 2)
    depth_ = 1 - exponent;
    const int levels = std::max(depth_, 0);
    half_sd_.assign(static_cast<std::size_t>(levels) + 1, 0.0);
    for (int d = 1; d <= levels; ++d) {
        half_sd_[static_cast<std::size_t>(d)] = 0.5 * std::sqrt(std::ldexp(root_dt_, -(d - 1)));
    }
}

BrownianPath BrownianPath::rescaled_grid(int shift) const {
    return BrownianPath(seed_, std::ldexp(dt_, shift), horizon_, drivers_);
}

double BrownianPath::root_value(int driver, std::uint64_t index) const {
    return std::sqrt(root_dt_) *
           rng_.normal({0u, static_cast<std::uint32_t>(driver)}, index);
}

double BrownianPath::node_value(int driver, int level, std::uint64_t index) const {
    double v = root_value(driver, index >> level);
    for (int d = 1; d <= level; ++d) {
        const std::uint64_t parent = index >> (level - d + 1);
        const double left =
            0.5 * v + half_sd_[static_cast<std::size_t>(d)] *
                          rng_.normal({static_cast<std::uint32_t>(d),
                                       static_cast<std::uint32_t>(driver)},
                                      parent);
        v = ((index >> (level - d)) & 1u) ? v - left : left;
    }
    return v;
}

void BrownianPath::expand(int driver, int level, std::uint64_t index, double value,
                          std::vector<double>& buf) const {
    const int extra = depth_ - level;
    buf.assign(std::size_t{1} << extra, 0.0);
    buf[0] = value;
    for (int e = 0; e < extra; ++e) {
        const int d = level + e + 1;
        const std::size_t count = std::size_t{1} << e;
        const std::uint64_t first_parent = index << e;
        const double hs = half_sd_[static_cast<std::size_t>(d)];
        const StreamId sid{static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(driver)};
        for (std::size_t i = count; i-- > 0;) {
            const double p = buf[i];
            const double left = 0.5 * p + hs * rng_.normal(sid, first_parent + i);
            buf[2 * i] = left;
            buf[2 * i + 1] = p - left;
        }
    }
}

double BrownianPath::increment(int driver, std::uint64_t k) const {
    if (depth_ >= 0) return node_value(driver, depth_, k);
    const std::uint64_t per = std::uint64_t{1} << (-depth_);
    double sum = 0.0;
    for (std::uint64_t r = 0; r < per; ++r) sum += root_value(driver, k * per + r);
    return sum;
}

void BrownianPath::fill(int driver, std::uint64_t first, std::span<double> out) const {
    if (driver < 0 || driver >= drivers_) throw ParameterError("Brownian path: no such driver");
    if (depth_ <= kSubBlockBits) {
        // Shallow hierarchy: one expansion per root interval.
        std::vector<double> buf;
        std::size_t done = 0;
        while (done < out.size()) {
            const std::uint64_t k = first + done;
            if (depth_ <= 0) {
                out[done++] = increment(driver, k);
                continue;
            }
            const std::uint64_t root = k >> depth_;
            expand(driver, 0, root, root_value(driver, root), buf);
            const std::uint64_t offset = k - (root << depth_);
            const std::size_t take =
                std::min<std::size_t>(out.size() - done, buf.size() - static_cast<std::size_t>(offset));
            std::copy_n(buf.begin() + static_cast<std::ptrdiff_t>(offset), take, out.begin() + done);
            done += take;
        }
        return;
    }
    const int top = depth_ - kSubBlockBits;
    std::vector<double> buf;
    std::size_t done = 0;
    while (done < out.size()) {
        const std::uint64_t k = first + done;
        const std::uint64_t node = k >> kSubBlockBits;
        expand(driver, top, node, node_value(driver, top, node), buf);
        const std::uint64_t offset = k - (node << kSubBlockBits);
        const std::size_t take =
            std::min<std::size_t>(out.size() - done, buf.size() - static_cast<std::size_t>(offset));
        std::copy_n(buf.begin() + static_cast<std::ptrdiff_t>(offset), take, out.begin() + done);
        done += take;
    }
}

std::vector<double> BrownianPath::increments(int driver) const {
    std::vector<double> out(static_cast<std::size_t>(steps_));
    fill(driver, 0, out);
    return out;
}

double BrownianPath::bridge_uniform(int driver, std::uint64_t k) const {
    // Keyed by the step's time interval so that all grids agree on the tag
    // only through (depth, k); different grids give different channels.
    return rng_.uniform({kUniformTag | static_cast<std::uint32_t>(depth_ & 0xff),
                         static_cast<std::uint32_t>(driver)},
                        k);
}

//---------------------------------------------------------------------------//

BrownianCursor::BrownianCursor(const BrownianPath& path, std::uint64_t start, std::size_t block)
    : path_(&path), pos_(start), block_start_(start), block_(block) {
    refill();
}

void BrownianCursor::refill() {
    block_start_ = pos_;
    if (pos_ >= path_->steps()) return;
    const auto n = static_cast<std::size_t>(
        std::min<std::uint64_t>(block_, path_->steps() - pos_));
    for (int d = 0; d < path_->drivers(); ++d) {
        auto& b = buf_[static_cast<std::size_t>(d)];
        b.resize(n);
        path_->fill(d, pos_, b);
    }
}

std::array<double, 2> BrownianCursor::next() {
    if (pos_ - block_start_ >= buf_[0].size()) refill();
    const auto i = static_cast<std::size_t>(pos_ - block_start_);
    std::array<double, 2> dw{buf_[0][i], path_->drivers() == 2 ? buf_[1][i] : 0.0};
    ++pos_;
    return dw;
}

}  // namespace flowlab::sde
