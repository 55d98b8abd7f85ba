#include "twee/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "twee/error.hpp"

namespace twee {

namespace {

struct Field {
    std::string text;
    std::size_t column = 0;  // 1-based character column of the field start
};

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    std::string out(s.substr(b, e - b));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<Field> split(std::string_view line) {
    std::vector<Field> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        const std::size_t end = comma == std::string_view::npos ? line.size() : comma;
        out.push_back({trim(line.substr(start, end - start)), start + 1});
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, std::size_t column, const std::string& msg) {
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg);
}

bool blank(std::string_view line) { return line.find_first_not_of(" \t\r") == std::string_view::npos; }

/// Non-blank lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> lines_of(const std::string& text) {
    std::vector<std::pair<std::size_t, std::string>> out;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (number == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (!blank(line)) out.emplace_back(number, line);
    }
    return out;
}

}  // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

DataMatrix parse_csv_matrix(const std::string& text, const std::string& source, bool has_header) {
    const auto lines = lines_of(text);
    std::vector<std::string> labels;
    std::size_t first = 0;
    if (has_header) {
        if (lines.empty()) fail(source, 1, 1, "missing header row");
        for (const auto& f : split(lines[0].second)) labels.push_back(f.text);
        first = 1;
    }
    const std::size_t width = has_header ? labels.size() : (lines.empty() ? 0 : split(lines[0].second).size());
    const std::size_t n = lines.size() - first;
    if (n < 2) fail(source, lines.empty() ? 1 : lines.back().first, 1, "need at least 2 data rows");
    Matrix values(static_cast<Index>(n), static_cast<Index>(width));
    for (std::size_t r = 0; r < n; ++r) {
        const auto& [number, line] = lines[first + r];
        const auto fields = split(line);
        if (fields.size() != width) {
            fail(source, number, 1,
                 "expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < width; ++c) {
            const std::string& t = fields[c].text;
            double v = 0.0;
            const char* begin = t.data();
            const char* end = t.data() + t.size();
            if (!t.empty() && *begin == '+') ++begin;
            const auto [ptr, ec] = std::from_chars(begin, end, v);
            if (t.empty() || ec != std::errc() || ptr != end) {
                fail(source, number, fields[c].column, "'" + t + "' is not a number");
            }
            if (!std::isfinite(v)) fail(source, number, fields[c].column, "non-finite value '" + t + "'");
            values(static_cast<Index>(r), static_cast<Index>(c)) = v;
        }
    }
    try {
        return DataMatrix(std::move(values), std::move(labels));
    } catch (const ValidationError& e) {
        throw ParseError(source + ": " + e.what());
    }
}

DataMatrix read_csv_matrix(const std::string& path, bool has_header) {
    return parse_csv_matrix(read_file(path), path, has_header);
}

std::vector<std::string> parse_csv_labels(const std::string& text, const std::string& source, bool has_header) {
    const auto lines = lines_of(text);
    std::vector<std::string> out;
    for (std::size_t i = has_header ? 1 : 0; i < lines.size(); ++i) {
        const auto fields = split(lines[i].second);
        if (fields.size() != 1) fail(source, lines[i].first, 1, "expected a single label per row");
        if (fields[0].text.empty()) fail(source, lines[i].first, 1, "empty label");
        out.push_back(fields[0].text);
    }
    if (out.empty()) fail(source, 1, 1, "no labels found");
    return out;
}

std::vector<std::string> read_csv_labels(const std::string& path, bool has_header) {
    return parse_csv_labels(read_file(path), path, has_header);
}

}  // namespace twee
