#include <doctest.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include "evrender/error.hpp"
#include "evrender/evio.hpp"
#include "support.hpp"

using namespace evrender;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("evrender_test_" + std::to_string(std::random_device{}()) + "_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

}  // namespace

TEST_CASE("empty event stream writes only the header") {
    CHECK(format_events({}) == "s,x,y,p\n");
    TempDir dir;
    write_events(dir.path / "e.csv", {});
    CHECK(read_file(dir.path / "e.csv") == "s,x,y,p\n");
    CHECK(read_events(dir.path / "e.csv").empty());
}

TEST_CASE("events are written sorted with plain integers") {
    const std::vector<Event> ev{{10, 11, 3, -1}, {2, 0, 2, 1}, {1, 5, 2, 1}, {0, 5, 2, -1}};
    CHECK(format_events(ev) == "s,x,y,p\n2,2,0,1\n2,0,5,-1\n2,1,5,1\n3,10,11,-1\n");
}

TEST_CASE("event files round-trip") {
    std::mt19937_64 gen(2);
    std::uniform_int_distribution<int> c(0, 5000), f(1, 400), p(0, 1);
    EventStream ev;
    for (int i = 0; i < 2000; ++i) ev.push_back({c(gen), c(gen), f(gen), p(gen) ? 1 : -1});
    sort_events(ev);
    ev.erase(std::unique(ev.begin(), ev.end()), ev.end());
    TempDir dir;
    write_events(dir.path / "e.csv", ev);
    CHECK(read_events(dir.path / "e.csv") == ev);
    CHECK(parse_events(format_events(ev)) == ev);
}

TEST_CASE("malformed event lines report their line number") {
    CHECK_THROWS_WITH_AS(parse_events("s,x,y,p\n2,10,11,0\n", "e.csv"), doctest::Contains("e.csv:2"), ParseError);
    CHECK_THROWS_WITH_AS(parse_events("s,x,y,p\n2,10,11,0\n"), doctest::Contains("polarity"), ParseError);
    CHECK_THROWS_WITH_AS(parse_events("s,x,y,p\n1,1,1,1\n2,x,1,1\n"), doctest::Contains(":3"), ParseError);
    CHECK_THROWS_AS(parse_events("s,x,y,p\n1,1,1\n"), ParseError);
    CHECK_THROWS_AS(parse_events("s,x,y,p\n1,1,1,1,1\n"), ParseError);
    CHECK_THROWS_AS(parse_events("x,y\n"), ParseError);
    CHECK_THROWS_AS(parse_events(""), ParseError);
    CHECK_THROWS_AS(parse_events("s,x,y,p\n0,1,1,1\n"), ParseError);
    CHECK_THROWS_AS(parse_events("s,x,y,p\n1,-1,1,1\n"), ParseError);
    CHECK(parse_events("s,x,y,p\r\n2,1,1,-1\r\n").size() == 1);
    CHECK_THROWS_AS(read_events("/nonexistent/events.csv"), IoError);
}

TEST_CASE("1x1 PFM matches the golden file byte for byte") {
    const std::vector<float> px{0.5f};
    const std::string bytes = encode_pfm(px, 1, 1);
    CHECK(bytes == read_file(evtest::data_path("pixel_half.pfm")));
    CHECK(bytes.size() == 16);
    CHECK(bytes.substr(0, 12) == "Pf\n1 1\n-1.0\n");
}

TEST_CASE("PFM stores rows bottom to top") {
    const std::vector<float> px{1.0f, 2.0f};  // row 0 = 1, row 1 = 2
    const std::string bytes = encode_pfm(px, 1, 2);
    float first;
    std::memcpy(&first, bytes.data() + 12, 4);
    CHECK(first == 2.0f);
}

TEST_CASE("PFM round-trips random images") {
    std::mt19937_64 gen(9);
    std::normal_distribution<float> d(0.0f, 1000.0f);
    TempDir dir;
    for (int i = 0; i < 20; ++i) {
        const int w = 1 + i * 3, h = 1 + (i * 7) % 13;
        std::vector<float> px(static_cast<std::size_t>(w) * h);
        for (float& v : px) v = d(gen);
        write_pfm(dir.path / "img.pfm", px, w, h);
        const FloatImage img = read_pfm(dir.path / "img.pfm");
        CHECK(img.width == w);
        CHECK(img.height == h);
        CHECK(img.pixels == px);
    }
}

TEST_CASE("PFM rejects non-finite values before writing") {
    TempDir dir;
    const std::vector<float> px{1.0f, std::numeric_limits<float>::quiet_NaN()};
    CHECK_THROWS_AS(write_pfm(dir.path / "bad.pfm", px, 2, 1), std::invalid_argument);
    CHECK_FALSE(fs::exists(dir.path / "bad.pfm"));
    CHECK_FALSE(fs::exists(dir.path / "bad.pfm.tmp"));
    const std::vector<float> inf{std::numeric_limits<float>::infinity()};
    CHECK_THROWS_AS(encode_pfm(inf, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(encode_pfm(inf, 2, 1), std::invalid_argument);
}

TEST_CASE("PFM reader handles big-endian files and rejects junk") {
    std::string be = "Pf\n1 1\n1.0\n";
    be += std::string("\x3f\x00\x00\x00", 4);
    CHECK(decode_pfm(be).pixels == std::vector<float>{0.5f});
    CHECK_THROWS_AS(decode_pfm("PF\n1 1\n-1.0\nxxxxxxxxxxxx"), ParseError);
    CHECK_THROWS_AS(decode_pfm("Pf\n2 1\n-1.0\nxxxx"), ParseError);
    CHECK_THROWS_AS(decode_pfm("Pf\nx 1\n-1.0\nxxxx"), ParseError);
}

TEST_CASE("report speedup formatting") {
    CHECK(format_speedup(40.0 / 5.0) == "8.00×");
    CHECK(format_speedup(1.0) == "1.00×");
    MetricReport report;
    report.baseline_seconds = 40.0;
    report.rows.push_back({"one_tailed", 0.01, 40.0, 0.95, 1e-3, 5.0});
    CHECK(speedup(report, report.rows[0]) == 8.0);
    const std::string csv = format_report_csv(report);
    CHECK(csv.rfind("mode,rmse,psnr,f1,pscd,time_s,speedup\n", 0) == 0);
    CHECK(csv.find("8.00×") != std::string::npos);
}

TEST_CASE("report table has four metric rows and two timing rows per mode") {
    MetricReport report;
    report.baseline_seconds = 12.0;
    report.rows.push_back({"one_tailed", 0.0, std::numeric_limits<double>::infinity(), 1.0, 0.0, 3.0});
    report.rows.push_back({"two_tailed", 0.1, 20.0, 0.9, 2e-3, 2.0});
    const std::string table = format_report_table(report);
    for (const char* label : {"RMSE", "PSNR", "F1 score", "PSCD", "Speed up"}) {
        std::size_t count = 0;
        for (std::size_t pos = table.find(label); pos != std::string::npos; pos = table.find(label, pos + 1)) ++count;
        CHECK(count == 2);
    }
    CHECK(table.find("inf") != std::string::npos);
    CHECK(table.find("4.00×") != std::string::npos);
    CHECK(table.find("6.00×") != std::string::npos);
    CHECK(format_report_csv(report).find(",inf,") != std::string::npos);

    TempDir dir;
    write_report(dir.path / "report.csv", report);
    CHECK(fs::exists(dir.path / "report.csv"));
    CHECK(read_file(dir.path / "report.txt") == table);
}

TEST_CASE("atomic write leaves no temporary file") {
    TempDir dir;
    write_file_atomic(dir.path / "a.txt", "hello");
    CHECK(read_file(dir.path / "a.txt") == "hello");
    CHECK_FALSE(fs::exists(dir.path / "a.txt.tmp"));
    CHECK_THROWS_AS(write_file_atomic(dir.path / "missing" / "a.txt", "x"), IoError);
}
