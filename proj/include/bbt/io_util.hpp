#pragma once

// Output helpers shared by the command-line tool: metadata header lines,
// delimited-table writing, and stable floating-point formatting.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "bbt/errors.hpp"
#include "bbt/team_index.hpp"
#include "bbt/version.hpp"

namespace bbt {

struct OutputMeta {
    std::uint64_t seed = 0;
    std::string config_hash;

    void write(std::ostream& out) const {
        out << "# " << kToolName << ' ' << kVersion << '\n';
        out << "# seed = " << seed << '\n';
        out << "# config = " << config_hash << '\n';
    }
};

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Shortest-digits formatting with enough precision to round-trip ranking
// and draw tables deterministically.
inline std::string format_double(double v, int digits = 10) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw data_error("cannot open output file " + path.string());
    return out;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw data_error("cannot open input file " + path.string());
    return in;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }

    void write_csv(std::ostream& out, const OutputMeta& meta) const {
        meta.write(out);
        for (std::size_t c = 0; c < columns.size(); ++c)
            out << (c ? "," : "") << columns[c];
        out << '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                out << (c ? "," : "") << row[c];
            out << '\n';
        }
    }
};

}  // namespace bbt
