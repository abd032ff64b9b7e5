#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace vollab {

// Calendar date stored as days since 1970-01-01. All year fractions in the
// project are ACT/365 fixed.
class Date {
public:
    Date() = default;
    explicit constexpr Date(std::int64_t days_since_epoch) : days_(days_since_epoch) {}
    static Date from_ymd(int year, int month, int day);
    static Date parse(const std::string& iso); // "YYYY-MM-DD", throws DataError

    std::int64_t days() const { return days_; }
    std::string to_string() const; // ISO-8601

    Date operator+(std::int64_t d) const { return Date(days_ + d); }
    std::int64_t operator-(const Date& other) const { return days_ - other.days_; }
    auto operator<=>(const Date&) const = default;

private:
    std::int64_t days_ = 0;
};

// ACT/365 fixed year fraction between two dates.
inline double year_fraction(const Date& from, const Date& to) {
    return static_cast<double>(to - from) / 365.0;
}

} // namespace vollab
