#pragma once

// Small text formats: assignments as one CSV row of 1-based labels,
// observations as a p-by-n CSV grid, and flat key = value config files.
// Doubles print with %.17g so emit/parse round-trips are bit-exact.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "commdet/assignment.hpp"
#include "commdet/linalg.hpp"

namespace commdet::io {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str())
        throw std::invalid_argument("parse_double: not a number: '" + text + "'");
    return v;
}

inline long long parse_int(const std::string& text) {
    char* end = nullptr;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (end == text.c_str())
        throw std::invalid_argument("parse_int: not an integer: '" + text + "'");
    return v;
}

inline std::uint64_t parse_u64(const std::string& text) {
    char* end = nullptr;
    const std::uint64_t v = std::strtoull(text.c_str(), &end, 10);
    if (end == text.c_str())
        throw std::invalid_argument("parse_u64: not an integer: '" + text + "'");
    return v;
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// ---- assignments: single CSV row of 1-based labels ----

inline std::string format_assignment(const CommunityAssignment& x) {
    std::string out;
    for (int v = 0; v < x.n(); ++v) {
        if (v) out += ',';
        out += std::to_string(x(v) + 1);
    }
    return out;
}

// k = 0 infers the label count from the row's maximum
inline CommunityAssignment parse_assignment(const std::string& row, int k = 0) {
    std::vector<int> labels;
    for (const auto& cell : split_csv_row(row)) {
        const long long one_based = parse_int(trim(cell));
        if (one_based < 1)
            throw std::invalid_argument("parse_assignment: labels are 1-based positive");
        labels.push_back(static_cast<int>(one_based) - 1);
    }
    if (labels.empty()) throw std::invalid_argument("parse_assignment: empty row");
    if (k == 0)
        for (int c : labels) k = std::max(k, c + 1);
    return CommunityAssignment(std::move(labels), k);
}

// ---- observations: p rows, n columns ----

inline std::string format_observation(const Matrix& k) {
    std::string out;
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        for (Eigen::Index j = 0; j < k.cols(); ++j) {
            if (j) out += ',';
            out += format_double(k(i, j));
        }
        out += '\n';
    }
    return out;
}

inline Matrix parse_observation(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (trim(line).empty()) continue;
        std::vector<double> row;
        for (const auto& cell : split_csv_row(line)) {
            const double v = parse_double(trim(cell));
            if (!std::isfinite(v))
                throw std::invalid_argument("parse_observation: non-finite entry");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::invalid_argument("parse_observation: ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("parse_observation: empty file");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

// ---- flat key = value config text; '#' starts a comment ----

inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("config: empty key or value in '" + line + "'");
        if (!out.emplace(key, value).second)
            throw std::invalid_argument("config: duplicate key '" + key + "'");
    }
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

}  // namespace commdet::io
