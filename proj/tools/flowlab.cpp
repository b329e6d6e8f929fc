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

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "flowlab/config.hpp"
#include "flowlab/errors.hpp"
#include "flowlab/experiments.hpp"
#include "flowlab/report.hpp"

namespace {

using flowlab::cli::Experiment;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flowlab: strip-field SDE laboratory"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> rho;
    int threads = 0;
    bool provenance = false;
    app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed (overrides the config)");
    app.add_option("--out", out, "output directory (overrides the config)");
    app.add_option("--threads", threads, "worker threads, 0 = OpenMP default")->check(CLI::NonNegativeNumber);
    app.add_option("--dt-rho", rho, "step policy dt <= (rho / frequency)^2")->check(CLI::PositiveNumber);
    app.add_flag("--provenance", provenance, "also write provenance.json with wall-clock timestamps");

    const std::vector<std::pair<const char*, Experiment>> commands{
        {"coeff-probe", Experiment::coeff_probe}, {"homog", Experiment::homog_sweep},
        {"cross-qv", Experiment::cross_qv},       {"union", Experiment::union_prob},
        {"race", Experiment::race},               {"bc-suite", Experiment::bc_suite},
        {"plan", Experiment::corollary_plan},
    };
    for (const auto& [name, e] : commands) {
        app.add_subcommand(name, std::string("run the ") + std::string(flowlab::cli::to_string(e)) +
                                     " experiment");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    Experiment experiment = Experiment::homog_sweep;
    for (const auto& [name, e] : commands) {
        if (app.got_subcommand(name)) experiment = e;
    }

    flowlab::cli::ExperimentConfig cfg;
    try {
        flowlab::cli::ExperimentConfig base;
        base.experiment = experiment;
        cfg = config_path.empty() ? base : flowlab::cli::load_config(config_path, base);
        if (cfg.experiment != experiment) {
            throw flowlab::ConfigError("config sets experiment = " +
                                       std::string(flowlab::cli::to_string(cfg.experiment)) +
                                       " but the subcommand runs " +
                                       std::string(flowlab::cli::to_string(experiment)));
        }
        if (seed) cfg.seed = *seed;
        if (out) cfg.out = *out;
        if (rho) cfg.rho = *rho;
        flowlab::cli::validate(cfg);
    } catch (const flowlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    }

    const std::string started = utc_now();
    flowlab::cli::ExperimentReport report;
    try {
        report = flowlab::cli::run_experiment(cfg, flowlab::ExecPolicy{threads});
        flowlab::cli::emit_report(report, cfg.out, flowlab::cli::canonical_text(cfg));
    } catch (const flowlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const flowlab::ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFail;
    }

    if (provenance) {
        nlohmann::ordered_json p;
        p["config_hash"] = report.config_hash;
        p["seed"] = report.seed;
        p["dt"] = report.dt;
        p["threads"] = threads;
        p["started_utc"] = started;
        p["finished_utc"] = utc_now();
        std::ofstream(std::filesystem::path(cfg.out) / "provenance.json") << p.dump(2) << '\n';
    }

    for (const auto& c : report.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
        if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
        std::cout << '\n';
    }
    for (const auto& n : report.notes) std::cout << "note: " << n << '\n';
    std::cout << "report written to " << cfg.out << '\n';
    return report.passed() ? kExitPass : kExitFail;
}
