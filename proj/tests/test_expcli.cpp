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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "json.hpp"

#include "flowlab/config.hpp"
#include "flowlab/errors.hpp"
#include "flowlab/experiments.hpp"
#include "flowlab/report.hpp"

using namespace flowlab;
using namespace flowlab::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("flowlab_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
    return out;
}

// Small versions of each experiment for determinism checks.
ExperimentConfig small(Experiment e) {
    ExperimentConfig c;
    c.experiment = e;
    c.seed = 42;
    c.epsilons = {0.2, 0.1};
    c.cross_epsilon = 0.2;
    c.epsilon_tilde = 0.05;
    c.n_paths = 6;
    c.t = 0.1;
    c.n_max = 20;
    c.n_mc = 300;
    c.union_steps = 64;
    c.levels = 2;
    c.runs = 6;
    c.planning_paths = 20;
    c.level_horizon = 4.0;
    c.bc_n_max = 6;
    c.bc_trials = 20;
    c.fp_paths = 500;
    c.fp_steps = 32;
    c.plan_runs = 200;
    c.a_max = 10.0;
    c.strips = {2, 4};
    return c;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto c = parse_config(R"(# comment
experiment = race
seed = 7
rho = 0.05
profile.kind = raised_cosine
profile.lower = 0.6
profile.upper = 0.9
ladder.rule = explicit_list
ladder.values = 1, 3, 12
layout.N = 2, 6
variant = two_driver
homog.epsilons = 0.3, 0.1
race.bridge = true
plan.rates = constant_beta
)");
    CHECK(c.experiment == Experiment::race);
    CHECK(c.seed == 7);
    CHECK(c.rho == 0.05);
    CHECK(c.profile == "raised_cosine");
    CHECK(c.make_ladder().values() == std::vector<std::int64_t>{1, 3, 12});
    CHECK(c.strips == std::vector<std::int64_t>{2, 6});
    CHECK(c.variant == coeff::Variant::two_driver);
    CHECK(c.epsilons == std::vector<double>{0.3, 0.1});
    CHECK(c.bridge);
    CHECK(c.rates == bc::RateMode::constant_beta);
    CHECK(c.profile_pair().drivers() == 2);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("no_such_key = 1"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed = abc"), ConfigError);
    CHECK_THROWS_AS(parse_config("homog.epsilons = 0.1, 0.2"), ConfigError);
    CHECK_THROWS_AS(parse_config("rho = -1"), ConfigError);
    CHECK_THROWS_AS(parse_config("layout.N = 3"), ConfigError);
    CHECK_THROWS_AS(parse_config("ladder.rule = explicit_list\nladder.values = 1, 2, 4"), ConfigError);
    CHECK_THROWS_AS(parse_config("experiment = nope"), ConfigError);
    CHECK_THROWS_AS(parse_config("just text"), ConfigError);
    try {
        parse_config("seed = 1\n\nbogus = 2\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("3") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/file.conf"), ConfigError);
}

TEST_CASE("config hash") {
    ExperimentConfig a;
    ExperimentConfig b;
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.out = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));
    b.seed += 1;
    CHECK(config_hash(a) != config_hash(b));
    // canonical text round-trips
    const auto c = parse_config(canonical_text(small(Experiment::race)));
    CHECK(config_hash(c) == config_hash(small(Experiment::race)));
    CHECK(known_keys().size() > 40);
}

TEST_CASE("csv formatting and round trip") {
    CHECK(format_cell(Cell{std::int64_t{42}}) == "42");
    CHECK(format_cell(Cell{0.1}) == "0.1");
    CHECK(format_cell(Cell{2.0}) == "2.0");
    CHECK(format_cell(Cell{std::string("a,\"b\"")}) == "\"a,\"\"b\"\"\"");
    Table t{"demo", {"n", "value", "label"}, {}};
    t.add_row({std::int64_t{1}, 0.125, std::string("x")});
    t.add_row({std::int64_t{-3}, 1e-300, std::string("with, comma")});
    t.add_row({std::int64_t{7}, 3.0, std::string("quote \" inside")});
    CHECK_THROWS_AS(t.add_row({std::int64_t{1}}), std::logic_error);
    const Table back = parse_csv("demo", to_csv(t));
    CHECK(back == t);
}

TEST_CASE("empty report carries only the hash") {
    ExperimentReport r;
    r.config_hash = "0123456789abcdef";
    const auto j = nlohmann::json::parse(to_json(r));
    CHECK(j.size() == 1);
    CHECK(j["config_hash"] == "0123456789abcdef");
}

TEST_CASE("emit twice gives identical bytes and parses back") {
    const auto report = run_experiment(small(Experiment::union_prob), ExecPolicy{1});
    const auto d1 = scratch("emit1");
    const auto d2 = scratch("emit2");
    emit_report(report, d1, canonical_text(small(Experiment::union_prob)));
    emit_report(report, d2, canonical_text(small(Experiment::union_prob)));
    CHECK(dir_contents(d1) == dir_contents(d2));
    CHECK(fs::exists(d1 / "report.json"));
    CHECK(fs::exists(d1 / "config.echo"));
    for (const auto& t : report.tables) CHECK(read_csv(d1 / (t.name + ".csv")) == t);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("emit surfaces IO errors with the path") {
    ExperimentReport r;
    r.config_hash = "x";
    const auto blocker = scratch("blocker");
    std::ofstream(blocker.string()) << "file";
    try {
        emit_report(r, blocker / "sub", "");
        FAIL("expected an error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("blocker") != std::string::npos);
    }
    fs::remove_all(blocker);
}

TEST_CASE("reports do not depend on the thread count") {
    for (auto e : {Experiment::coeff_probe, Experiment::homog_sweep, Experiment::cross_qv, Experiment::union_prob,
                   Experiment::race, Experiment::bc_suite, Experiment::corollary_plan}) {
        CAPTURE(std::string(to_string(e)));
        const auto cfg = small(e);
        const auto one = run_experiment(cfg, ExecPolicy{1});
        const auto many = run_experiment(cfg, ExecPolicy{3});
        CHECK(to_json(one) == to_json(many));
        REQUIRE(one.tables.size() == many.tables.size());
        for (std::size_t i = 0; i < one.tables.size(); ++i) CHECK(to_csv(one.tables[i]) == to_csv(many.tables[i]));
        CHECK(one.config_hash == config_hash(cfg));
    }
}

TEST_CASE("union experiment examples") {
    UnionParams p;
    p.n_max = 10;
    p.steps = 64;
    p.beta_hat = 0.0;
    const auto flat = run_union_experiment(p, 400, 1);
    for (double v : flat.p) CHECK(v == flat.p.front());
    p.beta_hat = 1.0;
    p.a = 0.0;
    p.delta = 10.0;
    const auto easy = run_union_experiment(p, 400, 1);
    CHECK(easy.p.front() > 0.99);
    CHECK(easy.n_star.value() == 1);
    p.a = 1.0;
    p.delta = 0.1;
    const auto curve = run_union_experiment(p, 400, 2);
    CHECK(curve.monotone);
    for (std::size_t i = 1; i < curve.p.size(); ++i) CHECK(curve.p[i] >= curve.p[i - 1]);
}

TEST_CASE("realized strip counts") {
    CHECK(realized_strips(1000000000, 5, 2, 2, 0) == 2);
    CHECK(realized_strips(1000000000, 5, 2, 2, 3) == 8);
    CHECK(realized_strips(1000000000, 3, 2, 2, 3) == 6);
    CHECK(realized_strips(1, 5, 2, 2, 3) == 2);
    CHECK(realized_strips(5, 5, 2, 2, 3) == 4);
    // more strips means more distinct frequencies racing
    CHECK(realized_strips(1000, 5, 2, 2, 2) / 2 > realized_strips(1000, 5, 2, 2, 1) / 2);
}
