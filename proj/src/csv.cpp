#include "vollab/csv.hpp"
#include "vollab/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace vollab::csv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

} // namespace

Table Table::read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open file: " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_string(buffer.str(), path);
}

Table Table::from_string(const std::string& text, const std::string& origin) {
    Table t;
    t.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        auto cells = split_line(line);
        if (!have_header) {
            t.header_ = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header_.size()) {
            throw DataError(origin + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(t.header_.size()) + " columns, got " +
                            std::to_string(cells.size()));
        }
        t.rows_.push_back(std::move(cells));
        t.line_numbers_.push_back(line_no);
    }
    if (!have_header) {
        throw DataError(origin + ": missing header row");
    }
    return t;
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (header_[i] == name) {
            return i;
        }
    }
    throw DataError(origin_ + ": missing required column '" + name + "'");
}

void Table::fail(std::size_t row, std::size_t col, const std::string& what) const {
    throw DataError(origin_ + ":" + std::to_string(line_numbers_[row]) + ": column '" +
                    header_[col] + "': " + what);
}

double Table::number(std::size_t row, std::size_t col) const {
    const std::string& s = rows_[row][col];
    double value = 0.0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        fail(row, col, "not a number: '" + s + "'");
    }
    return value;
}

Date Table::date(std::size_t row, std::size_t col) const {
    try {
        return Date::parse(rows_[row][col]);
    } catch (const DataError& e) {
        fail(row, col, e.what());
    }
}

Writer::Writer(const std::string& path) : path_(path), file_(std::fopen(path.c_str(), "wb")) {
    if (file_ == nullptr) {
        throw DataError("cannot open file for writing: " + path);
    }
}

Writer::~Writer() {
    if (file_ != nullptr) {
        std::fclose(file_);
    }
}

void Writer::comment(const std::string& text) {
    std::fprintf(file_, "# %s\n", text.c_str());
}

void Writer::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        std::fputs(cells[i].c_str(), file_);
        std::fputc(i + 1 < cells.size() ? ',' : '\n', file_);
    }
}

std::string Writer::format(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

std::string Writer::format(const Date& d) {
    return d.to_string();
}

} // namespace vollab::csv
