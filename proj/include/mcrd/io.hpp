#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcrd/errors.hpp"

namespace mcrd {

using json = nlohmann::json;

// Full-precision decimal text: round-trips doubles exactly.
std::string format_full(double x);

struct Profile {
    std::vector<double> x, u, v;
};

void write_profile(const std::filesystem::path& path, const std::vector<double>& x,
                   const std::vector<double>& u, const std::vector<double>& v);
Profile read_profile(const std::filesystem::path& path);

// Generic numeric CSV with a one-line header.
void write_table(const std::filesystem::path& path, const std::vector<std::string>& columns,
                 const std::vector<std::vector<double>>& rows);
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};
Table read_table(const std::filesystem::path& path);

void write_json_file(const std::filesystem::path& path, const json& j);
json read_json_file(const std::filesystem::path& path);

// Minimal schema check for summary.json files (see README for the schema).
bool validate_summary(const json& summary, std::string* error = nullptr);

struct GoldenMismatch {
    std::string file;
    std::string location;  // "row R col NAME" or a JSON pointer
    double actual = 0.0;
    double expected = 0.0;
    double diff = 0.0;
    double tol = 0.0;
};

struct GoldenReport {
    bool pass = true;
    std::vector<GoldenMismatch> mismatches;  // sorted worst-first by diff/tol
    std::vector<std::string> missing;
};

// Compares every *.csv and *.json under `golden` (meta.json excluded) against
// the same relative path under `actual`, cell by cell. Per-column tolerances
// override the default.
GoldenReport compare_golden(const std::filesystem::path& actual,
                            const std::filesystem::path& golden, double default_tol = 0.0,
                            const std::map<std::string, double>& column_tol = {});

}  // namespace mcrd
