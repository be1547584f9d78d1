#include <doctest.h>
#include <httplib.h>

#include <cstring>
#include <thread>

#include "pmcast/errors.hpp"
#include "pmcast/fetch.hpp"
#include "testutil.hpp"

using namespace pmcast;

namespace {

struct LocalServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    LocalServer() {
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalServer() {
        server.stop();
        thread.join();
    }
    std::string url(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port) + path;
    }
};

void put_u16(std::string& s, unsigned v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
}
void put_u32(std::string& s, unsigned long v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// single stored (uncompressed) member, enough to exercise the reader
std::string make_stored_zip(const std::string& name, const std::string& content) {
    std::string local;
    put_u32(local, 0x04034b50);
    put_u16(local, 20); // version
    put_u16(local, 0);  // flags
    put_u16(local, 0);  // method: stored
    put_u16(local, 0);  // time
    put_u16(local, 0);  // date
    put_u32(local, 0);  // crc (unchecked by the reader)
    put_u32(local, content.size());
    put_u32(local, content.size());
    put_u16(local, name.size());
    put_u16(local, 0); // extra
    local += name + content;

    std::string central;
    put_u32(central, 0x02014b50);
    put_u16(central, 20);
    put_u16(central, 20);
    put_u16(central, 0);
    put_u16(central, 0);
    put_u16(central, 0);
    put_u16(central, 0);
    put_u32(central, 0);
    put_u32(central, content.size());
    put_u32(central, content.size());
    put_u16(central, name.size());
    put_u16(central, 0);
    put_u16(central, 0);
    put_u16(central, 0);
    put_u16(central, 0);
    put_u32(central, 0);
    put_u32(central, 0); // local header offset
    central += name;

    std::string eocd;
    put_u32(eocd, 0x06054b50);
    put_u16(eocd, 0);
    put_u16(eocd, 0);
    put_u16(eocd, 1);
    put_u16(eocd, 1);
    put_u32(eocd, central.size());
    put_u32(eocd, local.size());
    put_u16(eocd, 0);

    return local + central + eocd;
}

} // namespace

TEST_CASE("cache hit never touches the network") {
    testutil::TempDir dir;
    const auto dest = dir.path() / "cached.csv";
    testutil::write_file(dest, "pm25,dewp\n1,2\n");
    // an unroutable URL proves no request is made
    FetchResult r = fetch_dataset("http://127.0.0.1:1/never", dest);
    CHECK(r.from_cache);
    CHECK(r.sha256.size() == 64);
}

TEST_CASE("http 404 is a fetch error") {
    LocalServer srv;
    testutil::TempDir dir;
    CHECK_THROWS_AS(fetch_dataset(srv.url("/missing.csv"), dir.path() / "x.csv"), FetchError);
}

TEST_CASE("unreachable host is a fetch error with retry guidance") {
    testutil::TempDir dir;
    CHECK_THROWS_WITH_AS(fetch_dataset("http://127.0.0.1:1/x", dir.path() / "x.csv"),
                         doctest::Contains("download failed"), FetchError);
}

TEST_CASE("successful fetch stores the body and records a checksum") {
    LocalServer srv;
    const std::string body = "No,year\n1,2010\n";
    srv.server.Get("/data.csv", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(body, "text/csv");
    });
    testutil::TempDir dir;
    const auto dest = dir.path() / "data.csv";
    FetchResult r = fetch_dataset(srv.url("/data.csv"), dest);
    CHECK_FALSE(r.from_cache);
    CHECK(testutil::read_file(dest) == body);
    CHECK(std::filesystem::exists(dir.path() / "data.csv.sha256"));

    // second call: cache hit, checksum matches the recorded one
    FetchResult again = fetch_dataset(srv.url("/data.csv"), dest);
    CHECK(again.from_cache);
    REQUIRE(again.recorded_sha256.has_value());
    CHECK(*again.recorded_sha256 == again.sha256);
}

TEST_CASE("checksum drift is surfaced, not fatal") {
    testutil::TempDir dir;
    const auto dest = dir.path() / "d.csv";
    testutil::write_file(dest, "original\n");
    testutil::write_file(dir.path() / "d.csv.sha256", std::string(64, '0') + "\n");
    FetchResult r = fetch_dataset("http://127.0.0.1:1/never", dest);
    REQUIRE(r.recorded_sha256.has_value());
    CHECK(*r.recorded_sha256 != r.sha256);
}

TEST_CASE("zip payloads are unpacked to their csv member") {
    LocalServer srv;
    const std::string csv = "pm25,dewp,temp,pres,iws,is_snow,ir_rain\n1,2,3,4,5,6,7\n";
    const std::string zip = make_stored_zip("inner/data.csv", csv);
    srv.server.Get("/bundle.zip", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(zip, "application/zip");
    });
    testutil::TempDir dir;
    const auto dest = dir.path() / "data.csv";
    FetchResult r = fetch_dataset(srv.url("/bundle.zip"), dest);
    CHECK_FALSE(r.from_cache);
    CHECK(testutil::read_file(dest) == csv);
}
