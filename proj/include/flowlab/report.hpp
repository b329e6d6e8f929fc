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

#include <cstdint>
#include <deque>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace flowlab::cli {

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
    std::string name;  // file stem of the CSV
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
    bool operator==(const Table&) const = default;
};

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ExperimentReport {
    std::string experiment;
    std::string config_hash;
    std::uint64_t seed = 0;
    double dt = 0.0;  // finest step used, 0 if none
    std::vector<std::pair<std::string, Cell>> summary;
    std::deque<Table> tables;  // table() hands out references; keep them stable
    std::vector<Check> checks;
    std::vector<std::string> notes;
    // Extra files written verbatim next to report.json (name, content).
    std::vector<std::pair<std::string, std::string>> attachments;

    bool passed() const noexcept;
    Table& table(const std::string& name, std::vector<std::string> columns);
    void check(std::string name, bool passed, std::string detail = {});
};

/// Shortest round-trip decimal; integral values keep a trailing ".0" so the
/// cell type survives a CSV round trip.
std::string format_cell(const Cell& cell);

std::string to_csv(const Table& table);
Table parse_csv(const std::string& name, const std::string& text);
Table read_csv(const std::filesystem::path& path);

std::string to_json(const ExperimentReport& report);

/// Writes report.json, <table>.csv for every table, the attachments and
/// config.echo into `dir` (created if needed). Throws std::runtime_error
/// naming the path on IO failure.
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir,
                 const std::string& config_echo);

}  // namespace flowlab::cli
