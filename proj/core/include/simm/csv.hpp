#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace simm::csv {

/// Parsed CSV: header plus rows of raw fields. Supports RFC 4180 quoting.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string source;  // file name for error messages

    /// Column index of `name`, or -1.
    int column(std::string_view name) const;
};

Table parse(std::string_view text, const std::string& source = "<memory>");
Table read_file(const std::string& path);

/// Locale-independent number parsing; throws ValidationError naming row/column.
double to_double(const Table& table, std::size_t row, std::size_t col);

/// Shortest round-trip representation ("C" locale, '.' decimal point).
std::string format_double(double value);

std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

}  // namespace simm::csv
