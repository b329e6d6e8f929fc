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

// Serial reference against the OpenMP kernels. Thread count is the second
// argument (0 = OpenMP default); the serial rows use the reference code.

#include <benchmark/benchmark.h>

#include "flowlab/field.hpp"
#include "flowlab/homog.hpp"
#include "flowlab/sde.hpp"

using namespace flowlab;

namespace {

coeff::CoefficientField bench_field() {
    return coeff::CoefficientField(coeff::PeriodicProfile::flat_point(0.5, 1.0),
                                   coeff::FrequencyLadder::geometric_super(10.0),
                                   coeff::StripLayout({2, 4, 6}, 0.25));
}

std::vector<sde::InitialCondition> bench_members(std::size_t n) {
    std::vector<sde::InitialCondition> init;
    for (std::size_t i = 0; i < n; ++i) {
        init.push_back({-0.5 + 0.05 * static_cast<double>(i % 20), (static_cast<double>(i) + 0.5) / n});
    }
    return init;
}

homog::EnsembleSpec bench_spec() {
    return {{coeff::PeriodicProfile::flat_point(0.5, 1.0), std::nullopt},
            {0.2, 0.1, 0.05},
            0.0,
            0.25,
            sde::required_dt(20.0, 0.1),
            7,
            32,
            0.1};
}

void BM_BundleSerial(benchmark::State& state) {
    const auto field = bench_field();
    const auto init = bench_members(static_cast<std::size_t>(state.range(0)));
    const sde::BrownianPath path(1, sde::required_dt(field.max_frequency(), 0.1), 0.5, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sde::reference::integrate_bundle_serial(field, init, path));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<std::int64_t>(path.steps()));
}

void BM_BundleParallel(benchmark::State& state) {
    const auto field = bench_field();
    const auto init = bench_members(static_cast<std::size_t>(state.range(0)));
    const sde::BrownianPath path(1, sde::required_dt(field.max_frequency(), 0.1), 0.5, 1);
    const ExecPolicy exec{static_cast<int>(state.range(1))};
    for (auto _ : state) {
        benchmark::DoNotOptimize(sde::integrate_bundle(field, init, path, {}, exec));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<std::int64_t>(path.steps()));
}

void BM_EnsembleSerial(benchmark::State& state) {
    const auto spec = bench_spec();
    for (auto _ : state) benchmark::DoNotOptimize(homog::reference::run_ensemble_serial(spec));
}

void BM_EnsembleParallel(benchmark::State& state) {
    const auto spec = bench_spec();
    const ExecPolicy exec{static_cast<int>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(homog::run_ensemble(spec, exec));
}

}  // namespace

BENCHMARK(BM_BundleSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BundleParallel)->Args({16, 1})->Args({16, 0})->Args({64, 1})->Args({64, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleParallel)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
