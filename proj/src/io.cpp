#include "mcrd/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mcrd {

namespace fs = std::filesystem;

std::string format_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& cell, const fs::path& path, int line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + cell +
                         "'");
    }
}

}  // namespace

void write_table(const fs::path& path, const std::vector<std::string>& columns,
                 const std::vector<std::vector<double>>& rows) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path.string());
    for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << columns[j];
    out << "\n";
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw ParseError("row width does not match the header in " + path.string());
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_full(row[j]);
        out << "\n";
    }
    if (!out) throw ParseError("write failed: " + path.string());
}

Table read_table(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path.string());
    Table t;
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw ParseError(path.string() + ":1: empty file");
    ++line_no;
    t.columns = split_csv_line(line);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != t.columns.size())
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(t.columns.size()) + " columns, got " +
                             std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_number(c, path, line_no));
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_profile(const fs::path& path, const std::vector<double>& x, const std::vector<double>& u,
                   const std::vector<double>& v) {
    if (x.size() != u.size() || x.size() != v.size())
        throw ParseError("profile columns have mismatched lengths");
    std::vector<std::vector<double>> rows(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) rows[i] = {x[i], u[i], v[i]};
    write_table(path, {"x", "u", "v"}, rows);
}

Profile read_profile(const fs::path& path) {
    const Table t = read_table(path);
    if (t.columns != std::vector<std::string>{"x", "u", "v"})
        throw ParseError(path.string() + ":1: expected header 'x,u,v'");
    Profile p;
    for (const auto& row : t.rows) {
        p.x.push_back(row[0]);
        p.u.push_back(row[1]);
        p.v.push_back(row[2]);
    }
    return p;
}

void write_json_file(const fs::path& path, const json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw ParseError("write failed: " + path.string());
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path.string());
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

bool validate_summary(const json& summary, std::string* error) {
    auto fail = [&](const std::string& msg) {
        if (error) *error = msg;
        return false;
    };
    if (!summary.is_object()) return fail("summary must be an object");
    if (!summary.contains("command") || !summary["command"].is_string())
        return fail("missing string field 'command'");
    if (!summary.contains("model") || !summary["model"].is_object())
        return fail("missing object field 'model'");
    if (!summary["model"].contains("name")) return fail("model.name is required");
    const std::string cmd = summary["command"];
    static const std::map<std::string, std::vector<std::string>> required = {
        {"check", {"report"}},
        {"analyze", {"v_star", "x_star", "x1", "kappa_star", "lambda_slope", "verdict"}},
        {"solve", {"c", "layer_x", "residual_norm", "mass_error", "eps"}},
        {"spectrum", {"critical_re", "critical_im", "mu0_scalar"}},
        {"simulate", {"t_end", "mass_drift"}},
        {"sweep", {"runs"}},
    };
    const auto it = required.find(cmd);
    if (it == required.end()) return fail("unknown command '" + cmd + "'");
    for (const auto& key : it->second)
        if (!summary.contains(key)) return fail("summary for '" + cmd + "' lacks '" + key + "'");
    return true;
}

namespace {

void compare_csv(const fs::path& actual, const fs::path& golden, const std::string& rel,
                 double default_tol, const std::map<std::string, double>& column_tol,
                 GoldenReport& report) {
    const Table a = read_table(actual);
    const Table g = read_table(golden);
    if (a.columns != g.columns) {
        report.pass = false;
        report.mismatches.push_back({rel, "header", 0.0, 0.0, 1.0, 0.0});
        return;
    }
    const std::size_t rows = std::min(a.rows.size(), g.rows.size());
    if (a.rows.size() != g.rows.size()) {
        report.pass = false;
        report.mismatches.push_back(
            {rel, "row count " + std::to_string(a.rows.size()) + " vs " + std::to_string(g.rows.size()),
             double(a.rows.size()), double(g.rows.size()), 1.0, 0.0});
    }
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < g.columns.size(); ++j) {
            const auto it = column_tol.find(g.columns[j]);
            const double tol = it != column_tol.end() ? it->second : default_tol;
            const double diff = std::abs(a.rows[i][j] - g.rows[i][j]);
            if (diff > tol) {
                report.pass = false;
                report.mismatches.push_back({rel,
                                             "row " + std::to_string(i + 1) + " col " + g.columns[j],
                                             a.rows[i][j], g.rows[i][j], diff, tol});
            }
        }
    }
}

void compare_json_values(const json& a, const json& g, const std::string& rel, std::string ptr,
                         double tol, GoldenReport& report) {
    if (g.is_number() && a.is_number()) {
        const double diff = std::abs(a.get<double>() - g.get<double>());
        if (diff > tol) {
            report.pass = false;
            report.mismatches.push_back({rel, ptr, a.get<double>(), g.get<double>(), diff, tol});
        }
        return;
    }
    if (g.is_object() && a.is_object()) {
        for (auto it = g.begin(); it != g.end(); ++it) {
            if (!a.contains(it.key())) {
                report.pass = false;
                report.mismatches.push_back({rel, ptr + "/" + it.key(), 0.0, 0.0, 1.0, tol});
                continue;
            }
            compare_json_values(a[it.key()], it.value(), rel, ptr + "/" + it.key(), tol, report);
        }
        return;
    }
    if (g.is_array() && a.is_array() && g.size() == a.size()) {
        for (std::size_t i = 0; i < g.size(); ++i)
            compare_json_values(a[i], g[i], rel, ptr + "/" + std::to_string(i), tol, report);
        return;
    }
    if (a != g) {
        report.pass = false;
        report.mismatches.push_back({rel, ptr, 0.0, 0.0, 1.0, tol});
    }
}

}  // namespace

GoldenReport compare_golden(const fs::path& actual, const fs::path& golden, double default_tol,
                            const std::map<std::string, double>& column_tol) {
    GoldenReport report;
    if (!fs::exists(golden)) throw ParseError("golden directory missing: " + golden.string());
    for (const auto& entry : fs::recursive_directory_iterator(golden)) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), golden);
        if (rel.filename() == "meta.json") continue;
        const fs::path other = actual / rel;
        const std::string ext = rel.extension().string();
        if (ext != ".csv" && ext != ".json") continue;
        if (!fs::exists(other)) {
            report.pass = false;
            report.missing.push_back(rel.string());
            continue;
        }
        if (ext == ".csv")
            compare_csv(other, entry.path(), rel.string(), default_tol, column_tol, report);
        else
            compare_json_values(read_json_file(other), read_json_file(entry.path()), rel.string(),
                                "", default_tol, report);
    }
    std::sort(report.mismatches.begin(), report.mismatches.end(),
              [](const GoldenMismatch& x, const GoldenMismatch& y) {
                  const double rx = x.tol > 0 ? x.diff / x.tol : x.diff * 1e300;
                  const double ry = y.tol > 0 ? y.diff / y.tol : y.diff * 1e300;
                  return rx > ry;
              });
    return report;
}

}  // namespace mcrd
