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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <span>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace flowlab {

/// Worker count for the OpenMP kernels. threads == 1 runs inline;
/// threads == 0 uses the OpenMP default.
struct ExecPolicy {
    int threads = 0;
};

inline int available_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Runs body(i) for i in [0, n). Every index is handled exactly once;
/// callers write into index-addressed slots and reduce afterwards in index
/// order, so results do not depend on the schedule.
template <class Body>
void parallel_for(std::size_t n, const ExecPolicy& exec, Body&& body) {
#ifdef _OPENMP
    if (exec.threads != 1 && n > 1) {
        const int threads = exec.threads > 0 ? exec.threads : omp_get_max_threads();
        std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical(flowlab_parallel_for_error)
                if (!error) error = std::current_exception();
            }
        }
        if (error) std::rethrow_exception(error);
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) body(i);
}

/// Neumaier-compensated sum, evaluated in index order.
inline double compensated_sum(std::span<const double> values) noexcept {
    double sum = 0.0;
    double comp = 0.0;
    for (double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

}  // namespace flowlab
