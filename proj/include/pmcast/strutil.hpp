#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <vector>

namespace pmcast {

// Shortest round-trip representation; locale-independent, so repeated runs
// emit byte-identical files.
inline std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

// 17 significant digits (exact double round-trip) for persisted artifacts.
inline std::string format_double_17(double v) {
    char buf[40];
    int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    int n = std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return std::string(buf, static_cast<std::size_t>(n));
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

} // namespace pmcast
