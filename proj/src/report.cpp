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

#include "flowlab/report.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace flowlab::cli {

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
        throw std::logic_error("table " + name + ": row has " + std::to_string(row.size()) +
                               " cells, expected " + std::to_string(columns.size()));
    }
    rows.push_back(std::move(row));
}

bool ExperimentReport::passed() const noexcept {
    for (const auto& c : checks) {
        if (!c.passed) return false;
    }
    return true;
}

Table& ExperimentReport::table(const std::string& name, std::vector<std::string> columns) {
    for (auto& t : tables) {
        if (t.name == name) return t;
    }
    tables.push_back({name, std::move(columns), {}});
    return tables.back();
}

void ExperimentReport::check(std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(name), ok, std::move(detail)});
}

std::string format_cell(const Cell& cell) {
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&cell)) {
        if (std::isnan(*d)) return "nan";
        if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
        std::array<char, 64> buf{};
        const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), *d);
        std::string s(buf.data(), res.ptr);
        if (s.find_first_of(".e") == std::string::npos) s += ".0";
        return s;
    }
    std::string out = "\"";
    for (char ch : std::get<std::string>(cell)) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out += (i ? "," : "") + table.columns[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_cell(row[i]);
        }
        out += '\n';
    }
    return out;
}

namespace {

Cell parse_cell(std::string_view s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    if (s.find_first_of(".e") != std::string_view::npos) {
        double d = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), d);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
            throw std::runtime_error("csv: bad number '" + std::string(s) + "'");
        }
        return d;
    }
    std::int64_t i = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), i);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("csv: bad cell '" + std::string(s) + "'");
    }
    return i;
}

// Splits one CSV record starting at `pos`; quoted cells may contain
// commas, doubled quotes and newlines.
std::vector<Cell> parse_record(const std::string& text, std::size_t& pos) {
    std::vector<Cell> cells;
    while (true) {
        if (pos < text.size() && text[pos] == '"') {
            std::string value;
            ++pos;
            while (true) {
                if (pos >= text.size()) throw std::runtime_error("csv: unterminated quote");
                if (text[pos] == '"') {
                    if (pos + 1 < text.size() && text[pos + 1] == '"') {
                        value += '"';
                        pos += 2;
                        continue;
                    }
                    ++pos;
                    break;
                }
                value += text[pos++];
            }
            cells.emplace_back(std::move(value));
        } else {
            const auto end = text.find_first_of(",\n", pos);
            const auto stop = end == std::string::npos ? text.size() : end;
            cells.push_back(parse_cell(std::string_view(text).substr(pos, stop - pos)));
            pos = stop;
        }
        if (pos >= text.size() || text[pos] == '\n') {
            ++pos;
            return cells;
        }
        ++pos;  // comma
    }
}

}  // namespace

Table parse_csv(const std::string& name, const std::string& text) {
    Table t;
    t.name = name;
    const auto header_end = text.find('\n');
    if (header_end == std::string::npos) throw std::runtime_error("csv " + name + ": missing header");
    std::string_view header(text.data(), header_end);
    while (true) {
        const auto comma = header.find(',');
        t.columns.emplace_back(header.substr(0, comma));
        if (comma == std::string_view::npos) break;
        header.remove_prefix(comma + 1);
    }
    std::size_t pos = header_end + 1;
    while (pos < text.size()) t.add_row(parse_record(text, pos));
    return t;
}

Table read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(path.stem().string(), buf.str());
}

namespace {

nlohmann::ordered_json cell_json(const Cell& c) {
    if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
    if (const auto* d = std::get_if<double>(&c)) {
        if (!std::isfinite(*d)) return format_cell(c);
        return *d;
    }
    return std::get<std::string>(c);
}

}  // namespace

std::string to_json(const ExperimentReport& r) {
    nlohmann::ordered_json j;
    j["config_hash"] = r.config_hash;
    if (!r.experiment.empty()) {
        j["experiment"] = r.experiment;
        j["seed"] = r.seed;
        j["dt"] = r.dt;
        j["passed"] = r.passed();
        auto& summary = j["summary"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : r.summary) summary[k] = cell_json(v);
        auto& checks = j["checks"] = nlohmann::ordered_json::array();
        for (const auto& c : r.checks) {
            checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        }
        auto& tables = j["tables"] = nlohmann::ordered_json::array();
        for (const auto& t : r.tables) {
            tables.push_back({{"name", t.name}, {"file", t.name + ".csv"}, {"rows", t.rows.size()}});
        }
        j["notes"] = r.notes;
        auto& files = j["attachments"] = nlohmann::ordered_json::array();
        for (const auto& a : r.attachments) files.push_back(a.first);
    }
    return j.dump(2) + "\n";
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir,
                 const std::string& config_echo) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    write_file(dir / "report.json", to_json(report));
    for (const auto& t : report.tables) write_file(dir / (t.name + ".csv"), to_csv(t));
    for (const auto& [name, content] : report.attachments) write_file(dir / name, content);
    write_file(dir / "config.echo", config_echo);
}

}  // namespace flowlab::cli
