#pragma once

// Fixed-schema tables rendered as CSV or JSON. Doubles are printed with %.17g so
// output round-trips and is byte-stable for a given toolchain.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <stdexcept>
#include <type_traits>
#include <variant>
#include <vector>

namespace pathgap {

inline constexpr int kSchemaVersion = 1;

using Cell = std::variant<std::string, double, std::int64_t, std::uint64_t>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row)
    {
        if (row.size() != columns.size()) throw std::logic_error("row width does not match the table schema");
        rows.push_back(std::move(row));
    }
};

namespace detail {

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string json_string(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        default: out += c;
        }
    }
    return out + "\"";
}

}  // namespace detail

inline void write_csv(std::ostream& os, const Table& t)
{
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            std::visit(
                [&](const auto& v) {
                    using V = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<V, double>) os << detail::format_double(v);
                    else os << v;
                },
                row[i]);
        }
        os << '\n';
    }
}

inline void write_json(std::ostream& os, const std::string& command, const Table& t)
{
    os << "{\"schema_version\":" << kSchemaVersion << ",\"command\":" << detail::json_string(command) << ",\"rows\":[";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        os << (r ? "," : "") << '{';
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            os << (i ? "," : "") << detail::json_string(t.columns[i]) << ':';
            std::visit(
                [&](const auto& v) {
                    using V = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<V, double>) {
                        if (std::isfinite(v)) os << detail::format_double(v);
                        else os << "null";
                    } else if constexpr (std::is_same_v<V, std::string>) {
                        os << detail::json_string(v);
                    } else {
                        os << v;
                    }
                },
                t.rows[r][i]);
        }
        os << '}';
    }
    os << "]}\n";
}

/// Columns of `pathgap bounds`.
[[nodiscard]] inline Table bounds_table()
{
    return Table{{"T", "k1", "k2", "lambda0", "lambdaT", "t_star", "lambda_sup", "psi", "gap_lo_sup", "gap_lo_psi"}, {}};
}

/// Columns of `pathgap simulate` and `pathgap asymptotics`.
[[nodiscard]] inline Table simulate_table()
{
    return Table{{"T", "manifold", "dim", "kappa", "n_paths", "n_steps", "seed", "metric", "mean", "stderr"}, {}};
}

}  // namespace pathgap
