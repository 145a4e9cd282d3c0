#include "simm/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "simm/error.hpp"

namespace simm::csv {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace

int Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

Table parse(std::string_view text, const std::string& source) {
    Table table;
    table.source = source;
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_quoted = false;
    std::size_t line = 1;

    auto end_field = [&] {
        record.push_back(field_quoted ? field : trim(field));
        field.clear();
        field_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        const bool blank = record.size() == 1 && record[0].empty();
        if (!blank) records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field += ch;
            }
            continue;
        }
        switch (ch) {
            case '"':
                in_quotes = true;
                field_quoted = true;
                field.clear();
                break;
            case ',': end_field(); break;
            case '\n':
                end_record();
                ++line;
                break;
            case '\r': break;
            default: field += ch;
        }
    }
    if (in_quotes) {
        throw ParseError(source + ": unterminated quoted field near line " + std::to_string(line),
                         text.size());
    }
    if (!field.empty() || !record.empty()) end_record();

    if (records.empty()) {
        throw ValidationError(ValidationCode::Parse, source + ": file is empty");
    }
    table.header = std::move(records.front());
    if (!table.header.empty() && table.header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
        table.header[0].erase(0, 3);
    }
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != table.header.size()) {
            throw ValidationError(ValidationCode::DimensionMismatch,
                                  source + ": row " + std::to_string(r) + " has " +
                                      std::to_string(records[r].size()) + " fields, header has " +
                                      std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(records[r]));
    }
    return table;
}

Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError(ValidationCode::FileNotFound, "cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

double to_double(const Table& table, std::size_t row, std::size_t col) {
    const std::string& s = table.rows.at(row).at(col);
    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (!s.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (s.empty() || ec != std::errc() || ptr != end) {
        throw ValidationError(ValidationCode::Parse,
                              table.source + ": row " + std::to_string(row + 1) + ", column '" +
                                  table.header.at(col) + "': '" + s + "' is not a number");
    }
    return value;
}

std::string format_double(double value) {
    if (std::isnan(value)) return "NaN";
    if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += escape(fields[i]);
    }
    return out;
}

}  // namespace simm::csv
