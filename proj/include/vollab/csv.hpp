#pragma once

#include "vollab/dates.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace vollab::csv {

// Comma-separated table with a mandatory header row. Leading '#' lines are
// provenance comments and are skipped on read.
class Table {
public:
    static Table read_file(const std::string& path);
    static Table from_string(const std::string& text, const std::string& origin = "<string>");

    const std::vector<std::string>& header() const { return header_; }
    std::size_t n_rows() const { return rows_.size(); }

    // Column index by name; throws DataError naming the file if absent.
    std::size_t column(const std::string& name) const;

    const std::string& cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }
    double number(std::size_t row, std::size_t col) const;
    Date date(std::size_t row, std::size_t col) const;

private:
    std::string origin_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::size_t> line_numbers_; // for error messages

    [[noreturn]] void fail(std::size_t row, std::size_t col, const std::string& what) const;
};

// Streaming writer with fixed, locale-independent formatting.
class Writer {
public:
    explicit Writer(const std::string& path);
    ~Writer();
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;

    void comment(const std::string& text); // "# text"
    void row(const std::vector<std::string>& cells);

    static std::string format(double value);  // shortest-ish round-trippable, %.12g
    static std::string format(const Date& d);

private:
    std::string path_;
    std::FILE* file_;
};

} // namespace vollab::csv
