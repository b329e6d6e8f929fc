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

#include "flowlab/homog.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "flowlab/errors.hpp"

namespace flowlab::homog {

QuadratureResult simpson(const std::function<double(double)>& f, double tol, int max_doublings) {
    // Running sums of odd/even interior nodes let each doubling reuse every
    // previous evaluation.
    int panels = 2;
    const double f0 = f(0.0);
    const double f1 = f(1.0);
    double even_sum = 0.0;         // interior nodes shared with the previous level
    double odd_sum = f(0.5);       // new midpoints
    double previous = (f0 + f1 + 4.0 * odd_sum) / 6.0;
    for (int level = 1; level <= max_doublings; ++level) {
        even_sum += odd_sum;
        panels *= 2;
        const double h = 1.0 / panels;
        odd_sum = 0.0;
        for (int i = 1; i < panels; i += 2) odd_sum += f(i * h);
        const double current = (f0 + f1 + 4.0 * odd_sum + 2.0 * even_sum) * h / 3.0;
        const double diff = std::abs(current - previous);
        if (panels >= 64 && diff <= tol * std::max(1.0, std::abs(current))) {
            return {current, diff / 15.0, panels};
        }
        previous = current;
    }
    throw DomainError("simpson: no convergence after " + std::to_string(max_doublings) +
                      " doublings");
}

namespace {

void check_positive(const ProfilePair& pair) {
    constexpr int kProbe = 4096;
    for (int i = 0; i < kProbe; ++i) {
        const double s = pair.sum_of_squares(static_cast<double>(i) / kProbe);
        if (!(s > 0.0)) {
            throw DomainError("H1^2 + H2^2 vanishes at y = " + std::to_string(double(i) / kProbe));
        }
    }
}

}  // namespace

QuadratureResult invariant_normalizer(const ProfilePair& pair) {
    check_positive(pair);
    return simpson([&](double y) { return 1.0 / pair.sum_of_squares(y); });
}

double mu_average(const std::function<double(double)>& f, const ProfilePair& pair) {
    const auto v = invariant_normalizer(pair);
    const auto num = simpson([&](double y) { return f(y) / pair.sum_of_squares(y); });
    return num.value / v.value;
}

HomogenizationSummary effective_constants(const ProfilePair& pair, bool relaxed) {
    if (!relaxed && pair.h1.sampled_oscillation() < 1e-3) {
        throw ParameterError(
            "effective_constants: H1 must be non-constant (max - min >= 1e-3); otherwise "
            "beta_hat = 0");
    }
    const auto v = invariant_normalizer(pair);
    const auto weight = [&](double y) { return 1.0 / pair.sum_of_squares(y); };
    const auto m1 = simpson([&](double y) { return pair.h1(y) * weight(y); });
    double h1bar = m1.value / v.value;
    double h2bar = 0.0;
    double err = v.error + m1.error;
    if (pair.h2) {
        const auto m2 = simpson([&](double y) { return (*pair.h2)(y)*weight(y); });
        h2bar = m2.value / v.value;
        err += m2.error;
    }
    HomogenizationSummary s;
    s.v = v.value;
    s.beta1 = 1.0 / std::sqrt(v.value);
    s.alpha_hat = std::sqrt(h1bar * h1bar + h2bar * h2bar);
    s.beta_hat = std::sqrt(std::max(0.0, s.beta1 * s.beta1 - s.alpha_hat * s.alpha_hat));
    s.quad_err = err;
    return s;
}

std::string to_json(const HomogenizationSummary& s) {
    nlohmann::ordered_json j;
    j["v"] = s.v;
    j["beta1"] = s.beta1;
    j["alpha_hat"] = s.alpha_hat;
    j["beta_hat"] = s.beta_hat;
    j["quad_err"] = s.quad_err;
    return j.dump(2);
}

//---------------------------------------------------------------------------//

std::size_t steps_before(const SolutionPath& path, double t) {
    if (path.states.empty()) throw ParameterError("empty path");
    const double r = (t - path.t0) / path.dt;
    if (r <= 0.0) return 0;
    const auto k = static_cast<std::size_t>(std::ceil(r - 1e-9));
    if (k > path.steps()) {
        throw ParameterError("t = " + std::to_string(t) + " beyond path end " +
                             std::to_string(path.end_time()));
    }
    return k;
}

double realized_qv(const SolutionPath& path, double t) {
    const std::size_t n = steps_before(path, t);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = path.states[k + 1] - path.states[k];
        acc += d * d;
    }
    return acc;
}

double realized_cross_qv(const SolutionPath& a, const SolutionPath& b, double t) {
    if (a.dt != b.dt || a.t0 != b.t0) throw ParameterError("realized_cross_qv: grid mismatch");
    const std::size_t n = steps_before(a, t);
    if (n > b.steps()) throw ParameterError("realized_cross_qv: second path too short");
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        acc += (a.states[k + 1] - a.states[k]) * (b.states[k + 1] - b.states[k]);
    }
    return acc;
}

double ergodic_average(const SolutionPath& path, const std::function<double(double)>& f,
                       double epsilon, double t) {
    if (!(epsilon > 0.0)) throw ParameterError("ergodic_average: epsilon must be > 0");
    const std::size_t n = steps_before(path, t);
    double acc = 0.0;
    double fa = f(path.states[0] / epsilon);
    for (std::size_t k = 0; k < n; ++k) {
        const double fb = f(path.states[k + 1] / epsilon);
        acc += 0.5 * (fa + fb) * path.dt;
        fa = fb;
    }
    return acc;
}

SolutionPath rescale_path(const SolutionPath& path, double epsilon) {
    if (!(epsilon > 0.0)) throw ParameterError("rescale_path: epsilon must be > 0");
    SolutionPath out = path;
    const double e2 = epsilon * epsilon;
    out.t0 = path.t0 / e2;
    out.dt = path.dt / e2;
    out.x0 = path.x0 / epsilon;
    for (double& x : out.states) x /= epsilon;
    if (out.exit) out.exit = sde::ExitEvent{path.exit->level / epsilon, path.exit->time / e2};
    return out;
}

QVEstimate summarize(const std::vector<double>& samples) {
    QVEstimate e;
    e.n_paths = samples.size();
    if (samples.empty()) return e;
    e.value = compensated_sum(samples) / static_cast<double>(samples.size());
    if (samples.size() > 1) {
        std::vector<double> sq(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            sq[i] = (samples[i] - e.value) * (samples[i] - e.value);
        }
        const double var = compensated_sum(sq) / static_cast<double>(samples.size() - 1);
        e.std_error = std::sqrt(var / static_cast<double>(samples.size()));
    }
    return e;
}

double sample_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw ParameterError("sample_correlation: need two equal-length samples of size >= 2");
    }
    const double ma = compensated_sum(a) / static_cast<double>(a.size());
    const double mb = compensated_sum(b) / static_cast<double>(b.size());
    std::vector<double> sab(a.size()), saa(a.size()), sbb(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab[i] = (a[i] - ma) * (b[i] - mb);
        saa[i] = (a[i] - ma) * (a[i] - ma);
        sbb[i] = (b[i] - mb) * (b[i] - mb);
    }
    return compensated_sum(sab) / std::sqrt(compensated_sum(saa) * compensated_sum(sbb));
}

//---------------------------------------------------------------------------//

std::size_t pair_index(std::size_t i, std::size_t j, std::size_t count) {
    // Row-major enumeration of the strict upper triangle.
    return i * count - i * (i + 1) / 2 + (j - i - 1);
}

namespace {

void check_spec(const EnsembleSpec& spec) {
    if (spec.epsilons.empty()) throw ParameterError("ensemble: no epsilon values");
    if (spec.n_paths == 0) throw ParameterError("ensemble: n_paths must be >= 1");
    const double smallest = *std::min_element(spec.epsilons.begin(), spec.epsilons.end());
    if (!(smallest > 0.0)) throw ParameterError("ensemble: epsilon must be > 0");
    const sde::ScaledProfile probe{&spec.pair, smallest};
    if (!probe.flat()) sde::check_resolution(spec.dt, probe.frequency(), spec.rho);
}

}  // namespace

std::vector<PathStats> run_ensemble(const EnsembleSpec& spec, const ExecPolicy& exec) {
    check_spec(spec);
    const std::size_t ne = spec.epsilons.size();
    const int drivers = spec.pair.drivers();
    std::vector<PathStats> out(spec.n_paths);
    parallel_for(spec.n_paths, exec, [&](std::size_t p) {
        const sde::BrownianPath path(derive_seed(spec.seed, p), spec.dt, spec.t, drivers);
        std::vector<sde::ScaledProfile> coeffs;
        for (double e : spec.epsilons) coeffs.push_back({&spec.pair, e});
        std::vector<double> x(ne, spec.x0);
        std::vector<double> inc(ne, 0.0);
        std::vector<sde::Vol> vol(ne);
        std::vector<double> h1_prev(ne);
        PathStats s;
        s.qv.assign(ne, 0.0);
        s.cross.assign(ne * (ne - 1) / 2, 0.0);
        s.endpoint.assign(ne, 0.0);
        s.occupation_h1.assign(ne, 0.0);
        for (std::size_t e = 0; e < ne; ++e) {
            vol[e] = coeffs[e].vol(x[e]);
            h1_prev[e] = vol[e].s1;
        }
        sde::BrownianCursor cursor(path);
        while (!cursor.done()) {
            const auto dw = cursor.next();
            for (std::size_t e = 0; e < ne; ++e) {
                const double xn = sde::em_step(x[e], vol[e], dw, drivers);
                inc[e] = xn - x[e];
                x[e] = xn;
                s.qv[e] += inc[e] * inc[e];
                vol[e] = coeffs[e].vol(xn);
                s.occupation_h1[e] += 0.5 * (h1_prev[e] + vol[e].s1) * path.dt();
                h1_prev[e] = vol[e].s1;
            }
            for (std::size_t i = 0; i < ne; ++i) {
                for (std::size_t j = i + 1; j < ne; ++j) {
                    s.cross[pair_index(i, j, ne)] += inc[i] * inc[j];
                }
            }
        }
        for (std::size_t e = 0; e < ne; ++e) s.endpoint[e] = x[e] - spec.x0;
        out[p] = std::move(s);
    });
    return out;
}

namespace reference {

std::vector<PathStats> run_ensemble_serial(const EnsembleSpec& spec) {
    check_spec(spec);
    const std::size_t ne = spec.epsilons.size();
    std::vector<PathStats> out;
    for (std::size_t p = 0; p < spec.n_paths; ++p) {
        const sde::BrownianPath path(derive_seed(spec.seed, p), spec.dt, spec.t,
                                     spec.pair.drivers());
        std::vector<SolutionPath> paths;
        sde::IntegrateOptions opt;
        opt.rho = spec.rho;
        for (double e : spec.epsilons) {
            paths.push_back(sde::integrate_with(sde::ScaledProfile{&spec.pair, e}, spec.x0, 0.0,
                                                path, sde::StopRule::at_horizon(), opt));
        }
        const double t_end = path.time(path.steps());
        PathStats s;
        for (std::size_t e = 0; e < ne; ++e) {
            s.qv.push_back(realized_qv(paths[e], t_end));
            s.endpoint.push_back(paths[e].states.back() - spec.x0);
            s.occupation_h1.push_back(ergodic_average(
                paths[e], [&](double z) { return spec.pair.h1(z); }, spec.epsilons[e], t_end));
        }
        for (std::size_t i = 0; i < ne; ++i) {
            for (std::size_t j = i + 1; j < ne; ++j) {
                s.cross.push_back(realized_cross_qv(paths[i], paths[j], t_end));
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace reference

}  // namespace flowlab::homog
