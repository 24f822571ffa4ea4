#include "csv.hpp"

#include "svam/errors.hpp"

#include <array>
#include <charconv>

namespace svam::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto end = line.find(sep, start);
        if (end == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, end - start)));
        start = end + 1;
    }
    return out;
}

Reader::Reader(std::string_view text) : text_(text) {}

bool Reader::next(std::string_view& line) {
    while (pos_ < text_.size()) {
        auto end = text_.find('\n', pos_);
        if (end == std::string_view::npos) end = text_.size();
        auto raw = text_.substr(pos_, end - pos_);
        pos_ = end + 1;
        ++line_no_;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        if (trim(raw).empty()) continue;
        line = raw;
        return true;
    }
    return false;
}

Header::Header(std::string_view line, std::size_t line_no) : line_no_(line_no) {
    for (auto f : split(line)) names_.emplace_back(f);
}

bool Header::has(std::string_view name) const {
    for (const auto& n : names_)
        if (n == name) return true;
    return false;
}

std::size_t Header::index(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return i;
    throw ParseError("missing column '" + std::string(name) + "' at line " + std::to_string(line_no_),
                     line_no_);
}

double parse_double(std::string_view field, std::size_t line_no, std::string_view what) {
    double v = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (field.empty() || ec != std::errc{} || ptr != last)
        throw ParseError("bad " + std::string(what) + " '" + std::string(field) + "' at line " +
                             std::to_string(line_no),
                         line_no);
    return v;
}

std::int64_t parse_int(std::string_view field, std::size_t line_no, std::string_view what) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError("bad " + std::string(what) + " '" + std::string(field) + "' at line " +
                             std::to_string(line_no),
                         line_no);
    return v;
}

std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace svam::csv
