#ifndef STATEPREP_CLI_TABLE_HPP
#define STATEPREP_CLI_TABLE_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "../errors.hpp"

namespace stateprep::cli
{

// 12 significant digits, '.' decimal point, no locale dependence.
inline std::string format_number(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    if (value == 0.0) {
        return "0"; // folds -0
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(const std::string &text)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

using Cell = std::variant<double, long long, std::string>;

struct ResultTable
{
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::string config_hash;
    std::string tool_version;
    std::string timestamp;

    void add_row(std::vector<Cell> row)
    {
        if (row.size() != columns.size()) {
            throw Error("ResultTable: row width does not match the header");
        }
        rows.push_back(std::move(row));
    }
};

namespace detail
{

inline std::string csv_escape(const std::string &s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

inline std::string render_cell(const Cell &cell)
{
    if (const auto *d = std::get_if<double>(&cell)) {
        return format_number(*d);
    }
    if (const auto *i = std::get_if<long long>(&cell)) {
        return std::to_string(*i);
    }
    return csv_escape(std::get<std::string>(cell));
}

} // namespace detail

// Two '#' metadata lines (hash + version, then timestamp), the header, rows.
// LF line endings only.
inline void write_csv(std::ostream &out, const ResultTable &table)
{
    out << "# config_hash=" << table.config_hash << " tool_version=" << table.tool_version << '\n';
    out << "# generated_at=" << table.timestamp << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out << (i ? "," : "") << detail::csv_escape(table.columns[i]);
    }
    out << '\n';
    for (const auto &row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << detail::render_cell(row[i]);
        }
        out << '\n';
    }
}

} // namespace stateprep::cli

#endif // STATEPREP_CLI_TABLE_HPP
