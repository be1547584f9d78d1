#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pmcast {

// Calendar stamp of one hourly observation. hour_key() is strictly
// increasing over valid Gregorian timestamps.
struct Timestamp {
    int year = 0;
    int month = 1;
    int day = 1;
    int hour = 0;

    std::int64_t hour_key() const;
    bool operator==(const Timestamp&) const = default;
    bool operator<(const Timestamp& o) const { return hour_key() < o.hour_key(); }
};

// One row of the UCI "Beijing PM2.5" file. pm25 is the only field that may
// be missing (literal NA in the file).
struct RawRecord {
    int row_no = 0;
    Timestamp when;
    std::optional<double> pm25;
    double dewp = 0.0;
    double temp = 0.0;
    double pres = 0.0;
    std::string cbwd;
    double iws = 0.0;
    double is_snow = 0.0;
    double ir_rain = 0.0;
};

inline constexpr const char* kUciHeader =
    "No,year,month,day,hour,pm2.5,DEWP,TEMP,PRES,cbwd,Iws,Is,Ir";

// Reads the UCI CSV. Throws FormatError when the header does not match and
// ParseError naming the offending line for malformed rows. Records must be
// strictly time-ordered with hourly cadence.
std::vector<RawRecord> load_csv(const std::string& path);

} // namespace pmcast
