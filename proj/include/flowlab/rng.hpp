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
#include <cmath>
#include <cstdint>
#include <numbers>

namespace flowlab {

//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 counter-based generator (Salmon et al., SC'11).
 *
 * Every draw is a pure function of (key, counter), so any sample of any
 * stream can be produced independently by any worker. This is what makes the
 * Monte Carlo kernels independent of thread count and scheduling.
 */
class Philox4x32 {
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter generate(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

  private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

// SplitMix64 finalizer; used to derive independent 64-bit keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Key for replica `index` of an experiment seeded with `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(seed ^ mix64(index + 0x632BE59BD9B4E019ull));
}

/// Identifies one independent stream under a key: `tag` separates purposes
/// (bridge level, uniform side channel, ...), `lane` separates drivers or
/// event indices.
struct StreamId {
    std::uint32_t tag = 0;
    std::uint32_t lane = 0;
};

class CounterRng {
  public:
    constexpr explicit CounterRng(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    Philox4x32::Counter raw(StreamId s, std::uint64_t index) const noexcept {
        return Philox4x32::generate({static_cast<std::uint32_t>(index),
                                     static_cast<std::uint32_t>(index >> 32), s.tag, s.lane},
                                    key_);
    }

    // Uniform on the open interval (0, 1), 53 bits.
    double uniform(StreamId s, std::uint64_t index) const noexcept {
        const auto r = raw(s, index);
        return to_open_unit((std::uint64_t{r[0]} << 32) | r[1]);
    }

    // Standard normal via Box-Muller (cosine branch).
    double normal(StreamId s, std::uint64_t index) const noexcept {
        const auto r = raw(s, index);
        const double u1 = to_open_unit((std::uint64_t{r[0]} << 32) | r[1]);
        const double u2 = to_open_unit((std::uint64_t{r[2]} << 32) | r[3]);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    static double to_open_unit(std::uint64_t bits) noexcept {
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    Philox4x32::Key key_;
};

}  // namespace flowlab
