#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace pmcast {

inline constexpr const char* kUciDatasetUrl =
    "https://archive.ics.uci.edu/static/public/381/beijing+pm2+5+data.zip";
inline constexpr const char* kDatasetFileName = "PRSA_data_2010.1.1-2014.12.31.csv";

struct FetchResult {
    std::filesystem::path path;
    bool from_cache = false;
    std::string sha256;
    std::optional<std::string> recorded_sha256; // previous checksum, when present
};

// Downloads `url` to `dest` unless `dest` already exists (cache hit, no
// network touched). Zip payloads are unpacked in place: the first .csv
// member becomes `dest`. The checksum is recorded next to the file; a
// mismatch on a later run is reported as drift by the caller, not a
// failure.
FetchResult fetch_dataset(const std::string& url, const std::filesystem::path& dest);

std::string sha256_file(const std::filesystem::path& path);

} // namespace pmcast
