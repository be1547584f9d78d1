#include "pmcast/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "pmcast/errors.hpp"

namespace pmcast {

namespace {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, int line_no, const char* field) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        std::ostringstream os;
        os << "line " << line_no << ": cannot parse " << field << " value '" << s << "'";
        throw ParseError(os.str());
    }
    return v;
}

int parse_int(const std::string& s, int line_no, const char* field) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        std::ostringstream os;
        os << "line " << line_no << ": cannot parse " << field << " value '" << s << "'";
        throw ParseError(os.str());
    }
    return v;
}

} // namespace

std::int64_t Timestamp::hour_key() const {
    return days_from_civil(year, month, day) * 24 + hour;
}

std::vector<RawRecord> load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw FormatError("'" + path + "': empty file, missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kUciHeader) {
        throw FormatError("'" + path + "': header does not match the UCI Beijing PM2.5 layout (got '" +
                          line + "')");
    }

    std::vector<RawRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 13) {
            std::ostringstream os;
            os << "line " << line_no << ": expected 13 columns, got " << fields.size();
            throw ParseError(os.str());
        }
        RawRecord r;
        r.row_no = parse_int(fields[0], line_no, "No");
        r.when.year = parse_int(fields[1], line_no, "year");
        r.when.month = parse_int(fields[2], line_no, "month");
        r.when.day = parse_int(fields[3], line_no, "day");
        r.when.hour = parse_int(fields[4], line_no, "hour");
        if (fields[5] == "NA") {
            r.pm25 = std::nullopt;
        } else {
            r.pm25 = parse_double(fields[5], line_no, "pm2.5");
        }
        r.dewp = parse_double(fields[6], line_no, "DEWP");
        r.temp = parse_double(fields[7], line_no, "TEMP");
        r.pres = parse_double(fields[8], line_no, "PRES");
        r.cbwd = fields[9];
        r.iws = parse_double(fields[10], line_no, "Iws");
        r.is_snow = parse_double(fields[11], line_no, "Is");
        r.ir_rain = parse_double(fields[12], line_no, "Ir");

        if (r.when.month < 1 || r.when.month > 12) {
            std::ostringstream os;
            os << "line " << line_no << ": month " << r.when.month << " out of range";
            throw FormatError(os.str());
        }
        if (r.when.hour < 0 || r.when.hour > 23) {
            std::ostringstream os;
            os << "line " << line_no << ": hour " << r.when.hour << " out of range";
            throw FormatError(os.str());
        }
        if (!records.empty() &&
            r.when.hour_key() != records.back().when.hour_key() + 1) {
            std::ostringstream os;
            os << "line " << line_no << ": records must advance by exactly one hour";
            throw FormatError(os.str());
        }
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace pmcast
