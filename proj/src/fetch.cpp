#include "pmcast/fetch.hpp"

#include <curl/curl.h>
#include <openssl/evp.h>
#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "pmcast/errors.hpp"

namespace pmcast {

namespace {

size_t write_to_string(char* ptr, size_t size, size_t nmemb, void* userdata) {
    auto* out = static_cast<std::string*>(userdata);
    out->append(ptr, size * nmemb);
    return size * nmemb;
}

std::string http_get(const std::string& url) {
    CURL* curl = curl_easy_init();
    if (!curl) throw FetchError("curl initialization failed");
    std::string body;
    char errbuf[CURL_ERROR_SIZE] = {0};
    curl_easy_setopt(curl, CURLOPT_URL, url.c_str());
    curl_easy_setopt(curl, CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(curl, CURLOPT_WRITEFUNCTION, write_to_string);
    curl_easy_setopt(curl, CURLOPT_WRITEDATA, &body);
    curl_easy_setopt(curl, CURLOPT_ERRORBUFFER, errbuf);
    curl_easy_setopt(curl, CURLOPT_CONNECTTIMEOUT, 30L);
    CURLcode rc = curl_easy_perform(curl);
    long status = 0;
    curl_easy_getinfo(curl, CURLINFO_RESPONSE_CODE, &status);
    curl_easy_cleanup(curl);
    if (rc != CURLE_OK) {
        std::ostringstream os;
        os << "download failed: " << (errbuf[0] ? errbuf : curl_easy_strerror(rc))
           << " (check connectivity or place the file manually and re-run)";
        throw FetchError(os.str());
    }
    if (status >= 400) {
        std::ostringstream os;
        os << "download failed: HTTP " << status << " for " << url
           << " (the URL may have moved; pass --url or place the file manually)";
        throw FetchError(os.str());
    }
    return body;
}

std::uint32_t rd_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t rd_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::string inflate_raw(const unsigned char* data, std::size_t comp_size,
                        std::size_t uncomp_size) {
    std::string out;
    out.resize(uncomp_size);
    z_stream zs;
    std::memset(&zs, 0, sizeof(zs));
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw FetchError("zlib init failed");
    zs.next_in = const_cast<unsigned char*>(data);
    zs.avail_in = static_cast<uInt>(comp_size);
    zs.next_out = reinterpret_cast<unsigned char*>(out.data());
    zs.avail_out = static_cast<uInt>(uncomp_size);
    int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw FetchError("zip member failed to decompress");
    return out;
}

// Minimal zip reader: finds the central directory and extracts the first
// .csv member (stored or deflated). Enough for the UCI archive.
std::string extract_first_csv(const std::string& zip) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(zip.data());
    const std::size_t n = zip.size();
    // locate end-of-central-directory (scan backwards over the comment)
    std::size_t eocd = std::string::npos;
    const std::size_t scan_from = n >= 22 + 65536 ? n - 22 - 65536 : 0;
    for (std::size_t i = n >= 22 ? n - 22 : 0;; --i) {
        if (rd_u32(bytes + i) == 0x06054b50) {
            eocd = i;
            break;
        }
        if (i == scan_from) break;
    }
    if (eocd == std::string::npos) throw FetchError("zip: no end-of-central-directory record");
    std::uint16_t entries = rd_u16(bytes + eocd + 10);
    std::size_t cd_off = rd_u32(bytes + eocd + 16);

    for (int e = 0; e < entries; ++e) {
        if (cd_off + 46 > n || rd_u32(bytes + cd_off) != 0x02014b50)
            throw FetchError("zip: corrupt central directory");
        std::uint16_t method = rd_u16(bytes + cd_off + 10);
        std::uint32_t comp_size = rd_u32(bytes + cd_off + 20);
        std::uint32_t uncomp_size = rd_u32(bytes + cd_off + 24);
        std::uint16_t name_len = rd_u16(bytes + cd_off + 28);
        std::uint16_t extra_len = rd_u16(bytes + cd_off + 30);
        std::uint16_t comment_len = rd_u16(bytes + cd_off + 32);
        std::uint32_t local_off = rd_u32(bytes + cd_off + 42);
        std::string name(zip, cd_off + 46, name_len);
        cd_off += 46u + name_len + extra_len + comment_len;

        if (!name.ends_with(".csv")) continue;
        if (local_off + 30 > n || rd_u32(bytes + local_off) != 0x04034b50)
            throw FetchError("zip: corrupt local header for " + name);
        std::uint16_t lname = rd_u16(bytes + local_off + 26);
        std::uint16_t lextra = rd_u16(bytes + local_off + 28);
        std::size_t data_off = local_off + 30u + lname + lextra;
        if (data_off + comp_size > n) throw FetchError("zip: truncated member " + name);
        if (method == 0) return zip.substr(data_off, comp_size);
        if (method == 8) return inflate_raw(bytes + data_off, comp_size, uncomp_size);
        throw FetchError("zip: unsupported compression method for " + name);
    }
    throw FetchError("zip: archive contains no .csv member");
}

bool looks_like_zip(const std::string& body) {
    return body.size() >= 4 && body[0] == 'P' && body[1] == 'K' && body[2] == '\x03' &&
           body[3] == '\x04';
}

} // namespace

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw IoError("EVP context allocation failed");
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

FetchResult fetch_dataset(const std::string& url, const std::filesystem::path& dest) {
    FetchResult res;
    res.path = dest;
    const std::filesystem::path sum_path = dest.string() + ".sha256";

    if (std::filesystem::exists(sum_path)) {
        std::ifstream in(sum_path);
        std::string rec;
        if (in >> rec) res.recorded_sha256 = rec;
    }

    if (std::filesystem::exists(dest)) {
        res.from_cache = true;
        res.sha256 = sha256_file(dest);
        return res;
    }

    std::string body = http_get(url);
    if (looks_like_zip(body)) body = extract_first_csv(body);

    std::filesystem::create_directories(dest.parent_path().empty() ? "." : dest.parent_path());
    {
        std::ofstream out(dest, std::ios::binary);
        if (!out) throw IoError("cannot write '" + dest.string() + "'");
        out.write(body.data(), static_cast<std::streamsize>(body.size()));
        if (!out) throw IoError("failed writing '" + dest.string() + "'");
    }
    res.sha256 = sha256_file(dest);
    if (!res.recorded_sha256) {
        std::ofstream out(sum_path);
        out << res.sha256 << '\n';
    }
    return res;
}

} // namespace pmcast
