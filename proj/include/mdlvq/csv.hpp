#pragma once

#include <fmt/format.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdlvq/analysis.hpp"
#include "mdlvq/codec.hpp"

namespace mdlvq {

inline constexpr const char* kSimSchema = "mdlvq.sim/1";
inline constexpr const char* kTableSchema = "mdlvq.table/1";

inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    return fmt::format("{:.10e}", v);
}

struct CsvTable {
    std::string schema;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string str() const {
        std::string out = "# schema=" + schema + "\n";
        auto line = [&](const std::vector<std::string>& cells) {
            for (size_t i = 0; i < cells.size(); ++i) {
                if (i) out += ',';
                out += cells[i];
            }
            out += '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
        return out;
    }
};

inline std::string patternLabel(Mask m, int n) { return m == 0 ? "none" : maskName(m, n); }

inline CsvTable simCsv(const ExperimentResult& r) {
    CsvTable t{kSimSchema, {"pattern", "samples", "empirical_mse", "theory_mse", "db_gap"}, {}};
    for (const auto& p : r.patterns)
        t.rows.push_back({patternLabel(p.mask, r.n), std::to_string(p.samples), num(p.empirical), num(p.theory),
                          std::isnan(p.theory) ? "nan" : num(dbGap(p.empirical, p.theory))});
    return t;
}

inline CsvTable fig2Csv(const std::vector<Fig2Row>& rows) {
    CsvTable t{kTableSchema, {"L", "gsl_term", "phi_term"}, {}};
    for (const auto& r : rows) t.rows.push_back({std::to_string(r.L), num(r.gslTerm), num(r.phiTerm)});
    return t;
}

// Reads a table written by CsvTable::str, refusing unknown schema versions.
inline CsvTable parseCsv(const std::string& text, const std::string& expectSchema) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# schema=", 0) != 0) throw std::invalid_argument("missing schema line");
    CsvTable t;
    t.schema = line.substr(9);
    if (t.schema != expectSchema) throw std::invalid_argument("unknown schema " + t.schema);
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cur;
        for (char c : s) {
            if (c == ',') {
                cells.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        cells.push_back(cur);
        return cells;
    };
    if (!std::getline(in, line)) throw std::invalid_argument("missing header");
    t.header = split(line);
    while (std::getline(in, line))
        if (!line.empty()) {
            auto cells = split(line);
            if (cells.size() != t.header.size()) throw std::invalid_argument("ragged row");
            t.rows.push_back(std::move(cells));
        }
    return t;
}

}  // namespace mdlvq
