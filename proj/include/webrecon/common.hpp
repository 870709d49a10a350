#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace webrecon {

/// Calendar date (no time-of-day). Repositories stamp holdings with the day
/// they cached them; day-level resolution is all the selection logic needs.
struct Date {
    int year = 0;
    int month = 0;  // 1-12
    int day = 0;    // 1-31

    auto operator<=>(const Date&) const = default;

    // "YYYY-MM-DD"
    std::string to_iso() const;
    static std::optional<Date> from_iso(std::string_view s);

    // Days since 1970-01-01 (proleptic Gregorian; negative before then).
    std::int64_t to_days() const;
    static Date from_days(std::int64_t days);

    Date plus_days(std::int64_t n) const { return from_days(to_days() + n); }
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);  // throws ConfigError on bad input

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed);
std::string to_hex(std::uint64_t v);

std::string ascii_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

std::string read_file(const std::string& path);               // throws StoreError
void write_file(const std::string& path, std::string_view bytes);  // creates parents

// Fixed-point rendering used everywhere a report prints a fraction, so that
// identical inputs render byte-identically across runs and platforms.
std::string format_fixed(double v, int places);

}  // namespace webrecon
