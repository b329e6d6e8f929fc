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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. `--only 3,5` restricts the run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "flowlab/bc.hpp"
#include "flowlab/config.hpp"
#include "flowlab/experiments.hpp"
#include "flowlab/homog.hpp"
#include "flowlab/report.hpp"
#include "flowlab/sde.hpp"

using namespace flowlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
    std::vector<std::string> info;
};

std::string fmt(double v, int digits = 6) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

const cli::Check* find_check(const cli::ExperimentReport& r, const std::string& name) {
    for (const auto& c : r.checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

const cli::Table& find_table(const cli::ExperimentReport& r, const std::string& name) {
    for (const auto& t : r.tables) {
        if (t.name == name) return t;
    }
    throw std::runtime_error("missing table " + name);
}

double num(const cli::Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    throw std::runtime_error("non-numeric cell");
}

std::size_t col(const cli::Table& t, const std::string& name) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (t.columns[i] == name) return i;
    }
    throw std::runtime_error("missing column " + name);
}

//---------------------------------------------------------------------------//

Outcome criterion_sandwich() {
    std::mt19937_64 gen(1001);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t violations = 0;
    std::size_t checks = 0;
    for (std::size_t n = 1; n <= 12; ++n) {
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> p(n);
            // Mix of uniform and high-probability vectors so the lower bound
            // is active as well.
            for (double& q : p) q = trial % 2 ? 0.8 + 0.2 * u(gen) : u(gen);
            for (std::size_t m = 1; m <= n; ++m) {
                const bc::EventProfile e(p, m);
                const double exact = bc::exact_at_least(e, bc::ExactMethod::enumeration);
                const double lo = std::max(0.0, bc::bc_lower(e));
                const double hi = std::min(1.0, bc::bc_upper(e));
                ++checks;
                if (lo > exact + 1e-12 || exact > hi + 1e-12) ++violations;
            }
        }
    }
    return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(checks) + " checks"};
}

// Independent oracle: mt19937_64 normals and the exact Brownian-bridge
// crossing probability between grid points.
Outcome criterion_first_passage() {
    constexpr int kPaths = 100000;
    constexpr int kSteps = 256;
    const double a = 1.0;
    const double t = 1.0;
    const double dt = t / kSteps;
    Outcome out{true, {}, {}};
    for (double rate : {0.25, 1.0}) {
        std::mt19937_64 gen(static_cast<std::uint64_t>(rate * 1000) + 7);
        std::normal_distribution<double> z;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        int sup_hits = 0;
        int inf_ok = 0;
        for (int p = 0; p < kPaths; ++p) {
            double x = 0.0;
            bool up = false;
            bool down = false;
            for (int k = 0; k < kSteps; ++k) {
                const double xn = x + std::sqrt(rate * dt) * z(gen);
                const double var = rate * dt;
                if (!up) {
                    up = xn >= a || u(gen) < std::exp(-2.0 * (a - x) * (a - xn) / var);
                }
                if (!down) {
                    down = xn <= -a || u(gen) < std::exp(-2.0 * (x + a) * (xn + a) / var);
                }
                x = xn;
            }
            sup_hits += up;
            inf_ok += !down;
        }
        const auto compare = [&](const char* name, double closed, int count) {
            const double est = static_cast<double>(count) / kPaths;
            const double se = std::sqrt(est * (1.0 - est) / kPaths);
            const double zscore = (est - closed) / se;
            out.passed = out.passed && std::abs(zscore) <= 3.0;
            out.info.push_back(std::string(name) + "(a=1, t=1, rate=" + fmt(rate) + "): closed " + fmt(closed) +
                               ", MC " + fmt(est) + " +- " + fmt(se, 3) + ", z = " + fmt(zscore, 3));
        };
        compare("p0", bc::p0(a, t, rate), sup_hits);
        compare("q0", bc::q0(a, t, rate), inf_ok);
    }
    out.detail = "4 comparisons, |z| <= 3 required";
    return out;
}

Outcome criterion_constants() {
    const auto h1 = coeff::PeriodicProfile::flat_point(0.5, 0.9);
    const auto two = homog::effective_constants({h1, h1.complement()});
    const auto one = homog::effective_constants({coeff::PeriodicProfile::flat_point(0.5, 1.0), std::nullopt});
    const double e2 = std::abs(two.beta1 - 1.0);
    const double identity = std::abs(one.alpha_hat * one.alpha_hat + one.beta_hat * one.beta_hat -
                                     one.beta1 * one.beta1);
    const bool ok = e2 <= 1e-10 && identity <= 1e-9 && one.beta_hat > 0.0;
    return {ok,
            "|beta1 - 1| = " + fmt(e2, 3) + " (two-driver); identity error " + fmt(identity, 3) +
                ", beta_hat = " + fmt(one.beta_hat),
            {"flat point: v = " + fmt(one.v, 10) + ", beta1 = " + fmt(one.beta1, 10) +
             ", alpha_hat = " + fmt(one.alpha_hat, 10)}};
}

Outcome criterion_homog_qv() {
    cli::ExperimentConfig cfg;
    cfg.experiment = cli::Experiment::homog_sweep;
    cfg.rho = 0.025;  // Euler bias at eps = 0.02 scales like rho^2
    const auto r = cli::run_homog_sweep(cfg);
    const auto& t = find_table(r, "qv_sweep");
    Outcome out;
    std::string errs;
    for (const auto& row : t.rows) {
        if (std::get<std::string>(row[col(t, "quantity")]) != "qv") continue;
        errs += (errs.empty() ? "" : ", ") + fmt(num(row[col(t, "epsilon")])) + ": " +
                fmt(num(row[col(t, "rel_error")]), 3) + " (se " +
                fmt(num(row[col(t, "std_error")]) / num(row[col(t, "target")]), 2) + ")";
    }
    const auto* c = find_check(r, "qv_trend");
    out.passed = c && c->passed;
    out.detail = "rho = 0.025; relative error by eps " + errs;
    return out;
}

Outcome criterion_cross_qv() {
    cli::ExperimentConfig cfg;
    cfg.experiment = cli::Experiment::cross_qv;
    const auto r = cli::run_cross_qv(cfg);
    const auto* a = find_check(r, "cross_within_10pct");
    const auto* b = find_check(r, "corr_within_0.1");
    return {a && b && a->passed && b->passed, (a ? a->detail : "") + "; correlation " + (b ? b->detail : "")};
}

Outcome criterion_corollary() {
    const auto plan = bc::plan_corollary(1.0, 1.0, 1.0, 0.25, 2);
    const auto v = bc::validate_corollary(plan, 10000, 20260101);
    const bool ok = v.estimate + v.ci_radius >= 0.75;
    return {ok,
            "delta = " + fmt(plan.delta) + ", u = " + fmt(plan.u) + ", k = " + std::to_string(plan.k) +
                ", N = " + std::to_string(plan.N) + "; P{tau <= T} = " + fmt(v.estimate) + " + " +
                fmt(v.ci_radius, 3) + " >= 0.75"};
}

Outcome criterion_union() {
    cli::UnionParams p;  // alpha_hat = beta_hat = 1, a = 1, delta = 0.1, S = T = 1, n_max = 200
    const auto curve = cli::run_union_experiment(p, 10000, 20260101);
    Outcome out;
    out.passed = curve.monotone && curve.n_star.has_value();
    out.detail = std::string("monotone ") + (curve.monotone ? "yes" : "no") + "; P(A_1) = " + fmt(curve.p.front()) +
                 ", P(union_200) = " + fmt(curve.p.back()) + " +- " + fmt(curve.se.back(), 3) +
                 (curve.n_star ? "; n* = " + std::to_string(*curve.n_star) : "; 0.95 not reached by n = 200");
    for (std::size_t n : {1u, 10u, 50u, 100u, 200u}) {
        out.info.push_back("n = " + std::to_string(n) + ": " + fmt(curve.p[n - 1]));
    }
    return out;
}

Outcome criterion_race() {
    cli::ExperimentConfig cfg;
    cfg.experiment = cli::Experiment::race;
    cfg.runs = 200;
    const auto r = cli::run_race(cfg);
    const auto* nested = find_check(r, "transcripts_nested");
    const auto* med = find_check(r, "median_gap_decreasing");
    const auto* tail = find_check(r, "tail_probability_decreasing");
    Outcome out;
    out.passed = nested && med && tail && nested->passed && med->passed && tail->passed;
    out.detail = "200 runs; " + (med ? med->detail : std::string()) + "; " + (tail ? tail->detail : std::string());
    out.info = r.notes;
    return out;
}

Outcome criterion_scheme() {
    // sigma == 1 through the full field path.
    const coeff::CoefficientField unit(coeff::PeriodicProfile::constant(1.0),
                                       coeff::FrequencyLadder::geometric_super(1000.0),
                                       coeff::StripLayout({2, 4, 6, 8}, 0.25));
    bool exact = true;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const sde::BrownianPath w(derive_seed(9, s), 1e-4, 1.0, 1);
        const double x0 = 0.1 * static_cast<double>(s) - 1.0;
        const auto sol = sde::integrate(unit, x0, 0.37, w);
        const auto inc = w.increments(0);
        double x = x0;
        exact = exact && sol.states.size() == inc.size() + 1 && sol.states[0] == x0;
        for (std::size_t k = 0; k < inc.size() && exact; ++k) {
            x += inc[k];
            exact = sol.states[k + 1] == x;
        }
    }

    // Two-driver unit-norm field: realized QV against t.
    const auto h1 = coeff::PeriodicProfile::flat_point(0.5, 0.9);
    const coeff::CoefficientField two(h1, coeff::FrequencyLadder::geometric_super(10.0),
                                      coeff::StripLayout({2, 4}, 0.25), coeff::Variant::two_driver);
    const double dt = sde::required_dt(two.max_frequency(), 0.1);
    std::size_t within = 0;
    std::size_t within_stat = 0;
    double worst_ratio = 0.0;
    constexpr std::size_t kPaths = 50;
    for (std::uint64_t s = 0; s < kPaths; ++s) {
        const sde::BrownianPath w(derive_seed(10, s), dt, 1.0, 2);
        const auto sol = sde::integrate(two, 0.0, 0.3, w);
        double max_inc = 0.0;
        for (std::size_t k = 0; k + 1 < sol.states.size(); ++k) {
            max_inc = std::max(max_inc, std::abs(sol.states[k + 1] - sol.states[k]));
        }
        const double qv = homog::realized_qv(sol, 1.0);
        const double bound = 2.0 * dt * static_cast<double>(sol.steps()) * max_inc * max_inc;
        within += std::abs(qv - 1.0) <= bound;
        within_stat += std::abs(qv - 1.0) <= 4.0 * std::sqrt(2.0 * dt);
        worst_ratio = std::max(worst_ratio, std::abs(qv - 1.0) / bound);
    }
    Outcome out;
    out.passed = exact && within == kPaths;
    out.detail = std::string("additive noise bit-exact: ") + (exact ? "yes" : "no") +
                 "; two-driver QV within 2 dt steps max_inc^2 on " + std::to_string(within) + "/" +
                 std::to_string(kPaths) + " paths (worst |QV - t| / bound = " + fmt(worst_ratio, 3) + ")";
    out.info.push_back("two-driver QV within 4 sqrt(2 dt) on " + std::to_string(within_stat) + "/" +
                       std::to_string(kPaths) + " paths, dt = " + fmt(dt, 3));
    return out;
}

std::map<std::string, std::string> emitted(const cli::ExperimentReport& r, const cli::ExperimentConfig& cfg,
                                           const fs::path& dir) {
    fs::remove_all(dir);
    cli::emit_report(r, dir, cli::canonical_text(cfg));
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        files[e.path().filename().string()] = s.str();
    }
    fs::remove_all(dir);
    return files;
}

Outcome criterion_determinism() {
    std::vector<cli::ExperimentConfig> configs;
    const auto add = [&](cli::Experiment e, const std::function<void(cli::ExperimentConfig&)>& tweak) {
        cli::ExperimentConfig c;
        c.experiment = e;
        tweak(c);
        configs.push_back(c);
    };
    add(cli::Experiment::coeff_probe, [](auto&) {});
    add(cli::Experiment::bc_suite, [](auto& c) { c.fp_paths = 20000; });
    add(cli::Experiment::corollary_plan, [](auto& c) { c.plan_runs = 2000; });
    add(cli::Experiment::union_prob, [](auto& c) { c.n_mc = 1000; });
    add(cli::Experiment::homog_sweep, [](auto& c) {
        c.n_paths = 8;
        c.t = 0.25;
    });
    add(cli::Experiment::cross_qv, [](auto& c) {
        c.n_paths = 4;
        c.t = 0.1;
    });
    add(cli::Experiment::race, [](auto& c) {
        c.runs = 10;
        c.planning_paths = 50;
    });
    const fs::path base = fs::temp_directory_path() / "flowlab_acceptance";
    std::size_t same = 0;
    std::size_t files = 0;
    std::string bad;
    for (const auto& cfg : configs) {
        const auto a = emitted(cli::run_experiment(cfg, ExecPolicy{1}), cfg, base / "a");
        const auto b = emitted(cli::run_experiment(cfg, ExecPolicy{4}), cfg, base / "b");
        const auto c = emitted(cli::run_experiment(cfg, ExecPolicy{1}), cfg, base / "c");
        files += a.size();
        if (a == b && a == c) {
            ++same;
        } else {
            bad += std::string(bad.empty() ? "" : ", ") + std::string(cli::to_string(cfg.experiment));
        }
    }
    return {same == configs.size(),
            std::to_string(same) + "/" + std::to_string(configs.size()) + " experiments byte-identical over " +
                "threads 1, 4 and a rerun (" + std::to_string(files) + " files each)" +
                (bad.empty() ? "" : "; differing: " + bad)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flowlab acceptance criteria"};
    std::vector<int> only;
    app.add_option("--only", only, "criterion numbers to run")->delimiter(',');
    CLI11_PARSE(app, argc, argv);
    const std::set<int> selected(only.begin(), only.end());

    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        Outcome (*run)();
    };
    const std::vector<Criterion> criteria = {
        {1, "bc sandwich", 30, criterion_sandwich},
        {2, "gaussian first passage", 60, criterion_first_passage},
        {3, "effective constants", 1, criterion_constants},
        {4, "homogenization qv", 300, criterion_homog_qv},
        {5, "cross-qv decorrelation", 300, criterion_cross_qv},
        {6, "corollary validation", 120, criterion_corollary},
        {7, "union experiment", 180, criterion_union},
        {8, "race qualitative check", 900, criterion_race},
        {9, "scheme exactness", 10, criterion_scheme},
        {10, "determinism", 600, criterion_determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what(), {}};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.passed && in_time;
        failures += !pass;
        std::printf("%s  %2d %-24s %s [%.1f s / %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over budget");
        for (const auto& line : o.info) std::printf("         %s\n", line.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
