#ifndef LORLAB_CSV_HPP
#define LORLAB_CSV_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lorlab/errors.hpp"

namespace lorlab {

// CSV table with '#'-prefixed metadata lines. Cells are stored as strings;
// numeric comparison parses on demand. Metadata is excluded from the body,
// so deterministic runs produce byte-identical bodies regardless of header
// comments.
struct CsvTable {
    std::vector<std::string> metadata; // without the leading '#'
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    static std::string format(double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }

    void add_row(const std::vector<double>& vals) {
        std::vector<std::string> r;
        for (double v : vals) r.push_back(format(v));
        rows.push_back(std::move(r));
    }

    std::string body() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < columns.size(); ++i)
            os << (i ? "," : "") << columns[i];
        os << "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                os << (i ? "," : "") << row[i];
            os << "\n";
        }
        return os.str();
    }

    void write(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw ConfigInvalid("cannot write " + path);
        for (const auto& m : metadata) f << "# " << m << "\n";
        f << body();
    }

    static CsvTable read(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw ConfigInvalid("cannot read " + path);
        CsvTable t;
        std::string line;
        bool header_done = false;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            if (line[0] == '#') {
                std::size_t s = line.find_first_not_of("# ");
                t.metadata.push_back(s == std::string::npos ? ""
                                                            : line.substr(s));
                continue;
            }
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            if (!header_done) {
                t.columns = cells;
                header_done = true;
            } else {
                t.rows.push_back(cells);
            }
        }
        return t;
    }
};

struct RegressionReport {
    bool pass = true;
    std::vector<std::string> failures; // human-readable cell diagnostics
};

// Per-cell relative comparison of two tables with per-column tolerances
// (fallback to default_tol). Non-numeric cells compare as strings; NaN in
// the new table fails unconditionally.
inline RegressionReport regression_compare(
    const CsvTable& fresh, const CsvTable& baseline,
    const std::map<std::string, double>& tolerances,
    double default_tol = 1e-9) {
    RegressionReport rep;
    if (fresh.columns != baseline.columns ||
        fresh.rows.size() != baseline.rows.size())
        throw SchemaMismatch("table schemas or row counts differ");
    for (std::size_t r = 0; r < fresh.rows.size(); ++r) {
        if (fresh.rows[r].size() != baseline.rows[r].size())
            throw SchemaMismatch("row width differs at row " +
                                 std::to_string(r));
        for (std::size_t c = 0; c < fresh.rows[r].size(); ++c) {
            const std::string& a = fresh.rows[r][c];
            const std::string& b = baseline.rows[r][c];
            char* enda = nullptr;
            char* endb = nullptr;
            double va = std::strtod(a.c_str(), &enda);
            double vb = std::strtod(b.c_str(), &endb);
            bool nums = (*enda == '\0' && *endb == '\0' && !a.empty() &&
                         !b.empty());
            std::string where = fresh.columns[c] + "[" + std::to_string(r) +
                                "]";
            if (!nums) {
                if (a != b) {
                    rep.pass = false;
                    rep.failures.push_back(where + ": '" + a + "' != '" + b +
                                           "'");
                }
                continue;
            }
            if (std::isnan(va)) {
                rep.pass = false;
                rep.failures.push_back(where + ": NaN in new table");
                continue;
            }
            auto it = tolerances.find(fresh.columns[c]);
            double tol = it == tolerances.end() ? default_tol : it->second;
            double scale = std::max({1.0, std::abs(va), std::abs(vb)});
            if (std::abs(va - vb) > tol * scale) {
                rep.pass = false;
                rep.failures.push_back(where + ": " + a + " vs " + b +
                                       " (tol " + CsvTable::format(tol) + ")");
            }
        }
    }
    return rep;
}

} // namespace lorlab

#endif
