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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "flowlab/rng.hpp"

namespace flowlab::sde {

//---------------------------------------------------------------------------//
/*!
 * A seeded Brownian path with `drivers` independent components sampled on
 * the uniform grid t_k = k dt, k = 0..steps.
 *
 * Increments are generated on demand from a dyadic Brownian-bridge
 * hierarchy. The coarsest ("root") interval length is dt * 2^L, normalised
 * into [1, 2); halving dt keeps the same root and adds one bridge level, so
 * the two paths agree: each coarse increment is the sum of its two refined
 * children (up to one rounding). The object is an immutable descriptor and
 * safe to share between threads.
 */
class BrownianPath {
  public:
    BrownianPath(std::uint64_t seed, double dt, double horizon, int drivers = 1);

    std::uint64_t seed() const noexcept { return seed_; }
    double dt() const noexcept { return dt_; }
    double horizon() const noexcept { return horizon_; }
    int drivers() const noexcept { return drivers_; }
    std::uint64_t steps() const noexcept { return steps_; }
    double time(std::uint64_t k) const noexcept { return static_cast<double>(k) * dt_; }

    /// Same seed and horizon on the grid dt * 2^shift (shift may be
    /// negative for refinement).
    BrownianPath rescaled_grid(int shift) const;

    /// Increment W(t_{k+1}) - W(t_k) of component `driver`.
    double increment(int driver, std::uint64_t k) const;

    /// Increments k = first .. first + out.size() - 1 into `out`.
    void fill(int driver, std::uint64_t first, std::span<double> out) const;

    std::vector<double> increments(int driver) const;

    /// Uniform (0,1) side channel attached to step k (Brownian-bridge
    /// crossing tests). Shared by all members that use this path.
    double bridge_uniform(int driver, std::uint64_t k) const;

    double root_dt() const noexcept { return root_dt_; }
    int bridge_depth() const noexcept { return depth_; }

  private:
    double node_value(int driver, int level, std::uint64_t index) const;
    double root_value(int driver, std::uint64_t index) const;
    void expand(int driver, int level, std::uint64_t index, double value,
                std::vector<double>& buf) const;

    std::uint64_t seed_;
    double dt_;
    double horizon_;
    int drivers_;
    std::uint64_t steps_;
    double root_dt_;
    int depth_;  // dt = root_dt * 2^-depth; negative when dt > root_dt
    std::vector<double> half_sd_;  // 0.5 * sqrt(length of a level-(d-1) node)
    CounterRng rng_;
};

/// Sequential reader over a BrownianPath, buffering one block at a time.
class BrownianCursor {
  public:
    explicit BrownianCursor(const BrownianPath& path, std::uint64_t start = 0,
                            std::size_t block = 4096);

    bool done() const noexcept { return pos_ >= path_->steps(); }
    std::uint64_t position() const noexcept { return pos_; }

    /// Increments of all drivers at the current step; advances by one.
    std::array<double, 2> next();

  private:
    void refill();

    const BrownianPath* path_;
    std::uint64_t pos_;
    std::uint64_t block_start_;
    std::size_t block_;
    std::array<std::vector<double>, 2> buf_;
};

}  // namespace flowlab::sde
