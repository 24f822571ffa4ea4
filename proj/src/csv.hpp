#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace svam::csv {

std::vector<std::string_view> split(std::string_view line, char sep = ',');

// Line-oriented reader. Handles LF and CRLF, skips blank lines, and tracks
// 1-based line numbers for error reporting.
class Reader {
public:
    explicit Reader(std::string_view text);

    bool next(std::string_view& line);
    std::size_t line_number() const { return line_no_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_no_ = 0;
};

// Header lookup: column name -> index. Throws ParseError on missing columns.
class Header {
public:
    Header(std::string_view line, std::size_t line_no);

    std::size_t index(std::string_view name) const;
    bool has(std::string_view name) const;
    std::size_t size() const { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::size_t line_no_;
};

double parse_double(std::string_view field, std::size_t line_no, std::string_view what);
std::int64_t parse_int(std::string_view field, std::size_t line_no, std::string_view what);

// Shortest representation that round-trips.
std::string format_double(double v);

}  // namespace svam::csv
