#include "evrender/evio.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "evrender/error.hpp"

namespace evrender {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view bytes) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---------------------------------------------------------------- events

std::string format_events(std::span<const Event> events) {
    EventStream sorted(events.begin(), events.end());
    sort_events(sorted);
    std::string out = "s,x,y,p\n";
    char line[64];
    for (const Event& e : sorted) {
        const int n = std::snprintf(line, sizeof line, "%d,%d,%d,%d\n", e.frame, e.x, e.y, e.polarity);
        out.append(line, static_cast<std::size_t>(n));
    }
    return out;
}

void write_events(const fs::path& path, std::span<const Event> events) {
    write_file_atomic(path, format_events(events));
}

EventStream parse_events(std::string_view text, const std::string& source) {
    EventStream events;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const auto fail = [&](const std::string& why) -> ParseError {
            return ParseError(source + ":" + std::to_string(line_no) + ": " + why);
        };
        if (!header_seen) {
            if (line != "s,x,y,p") throw fail("expected header \"s,x,y,p\"");
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;

        int fields[4];
        const char* p = line.data();
        const char* const last = line.data() + line.size();
        for (int k = 0; k < 4; ++k) {
            const auto [ptr, ec] = std::from_chars(p, last, fields[k]);
            if (ec != std::errc{}) throw fail("malformed integer in field " + std::to_string(k + 1));
            p = ptr;
            if (k < 3) {
                if (p == last || *p != ',') throw fail("expected 4 comma-separated fields");
                ++p;
            }
        }
        if (p != last) throw fail("trailing characters");
        const Event e{fields[1], fields[2], fields[0], fields[3]};
        if (e.polarity != 1 && e.polarity != -1) throw fail("polarity must be 1 or -1");
        if (e.frame < 1) throw fail("frame index must be >= 1");
        if (e.x < 0 || e.y < 0) throw fail("pixel coordinates must be >= 0");
        events.push_back(e);
    }
    if (!header_seen) throw ParseError(source + ":1: missing header \"s,x,y,p\"");
    return events;
}

EventStream read_events(const fs::path& path) { return parse_events(read_file(path), path.string()); }

// ------------------------------------------------------------------- PFM

std::string encode_pfm(std::span<const float> pixels, int width, int height) {
    if (width < 1 || height < 1 || pixels.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("encode_pfm: pixel count does not match dimensions");
    }
    if (!std::all_of(pixels.begin(), pixels.end(), [](float v) { return std::isfinite(v); })) {
        throw std::invalid_argument("encode_pfm: image contains non-finite values");
    }
    std::string out = "Pf\n" + std::to_string(width) + " " + std::to_string(height) + "\n-1.0\n";
    out.reserve(out.size() + pixels.size() * 4);
    for (int row = height - 1; row >= 0; --row) {
        for (int x = 0; x < width; ++x) {
            const auto bits = std::bit_cast<std::uint32_t>(pixels[static_cast<std::size_t>(row) * width + x]);
            for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
        }
    }
    return out;
}

void write_pfm(const fs::path& path, std::span<const float> pixels, int width, int height) {
    write_file_atomic(path, encode_pfm(pixels, width, height));
}

FloatImage decode_pfm(std::string_view bytes, const std::string& source) {
    std::size_t pos = 0;
    const auto next_token = [&]() {
        while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        return bytes.substr(start, pos - start);
    };
    const auto fail = [&](const std::string& why) { return ParseError(source + ": " + why); };

    if (next_token() != "Pf") throw fail("not a grayscale PFM (expected \"Pf\")");
    FloatImage img;
    double scale = 0.0;
    {
        const std::string w(next_token()), h(next_token()), s(next_token());
        try {
            img.width = std::stoi(w);
            img.height = std::stoi(h);
            scale = std::stod(s);
        } catch (const std::exception&) {
            throw fail("malformed header");
        }
    }
    if (img.width < 1 || img.height < 1 || scale == 0.0) throw fail("malformed header");
    ++pos;  // single whitespace byte ends the header
    const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
    if (bytes.size() - std::min(pos, bytes.size()) != count * 4) throw fail("payload size does not match header");

    const bool little = scale < 0.0;
    img.pixels.resize(count);
    for (int row = img.height - 1; row >= 0; --row) {
        for (int x = 0; x < img.width; ++x) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) {
                const auto byte = static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + b]));
                bits |= little ? byte << (8 * b) : byte << (8 * (3 - b));
            }
            pos += 4;
            img.pixels[static_cast<std::size_t>(row) * img.width + x] = std::bit_cast<float>(bits);
        }
    }
    return img;
}

FloatImage read_pfm(const fs::path& path) { return decode_pfm(read_file(path), path.string()); }

// ---------------------------------------------------------------- report

namespace {

std::string fmt(const char* spec, double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string opt(const char* spec, const std::optional<double>& v) { return v ? fmt(spec, *v) : std::string{}; }

}  // namespace

std::string format_speedup(double ratio) { return fmt("%.2f", ratio) + "×"; }

std::optional<double> speedup(const MetricReport& report, const ModeMetrics& row) {
    if (!report.baseline_seconds || !row.seconds || *row.seconds <= 0.0) return std::nullopt;
    return *report.baseline_seconds / *row.seconds;
}

std::string format_report_csv(const MetricReport& report) {
    std::string out = "mode,rmse,psnr,f1,pscd,time_s,speedup\n";
    for (const ModeMetrics& r : report.rows) {
        const auto up = speedup(report, r);
        out += r.mode + "," + opt("%.9g", r.rmse) + "," + opt("%.9g", r.psnr) + "," + opt("%.9g", r.f1) + "," +
               opt("%.9g", r.pscd) + "," + opt("%.6f", r.seconds) + "," + (up ? format_speedup(*up) : "") + "\n";
    }
    return out;
}

std::string format_report_table(const MetricReport& report) {
    std::ostringstream out;
    char line[128];
    const auto row = [&](const std::string& mode, const char* label, const std::string& value) {
        std::snprintf(line, sizeof line, "%-12s %-10s %14s\n", mode.c_str(), label, value.c_str());
        out << line;
    };
    if (report.baseline_seconds) row("baseline", "Time", fmt("%.3f s", *report.baseline_seconds));
    for (const ModeMetrics& r : report.rows) {
        if (r.mode == "baseline" && !r.rmse) continue;
        const auto up = speedup(report, r);
        row(r.mode, "RMSE", opt("%.6f", r.rmse));
        row("", "PSNR", opt("%.3f", r.psnr));
        row("", "F1 score", opt("%.5f", r.f1));
        row("", "PSCD", opt("%.3e", r.pscd));
        row("", "Time", r.seconds ? fmt("%.3f s", *r.seconds) : "");
        row("", "Speed up", up ? format_speedup(*up) : "");
    }
    return out.str();
}

void write_report(const fs::path& path, const MetricReport& report) {
    write_file_atomic(path, format_report_csv(report));
    fs::path table = path;
    table.replace_extension(".txt");
    write_file_atomic(table, format_report_table(report));
}

}  // namespace evrender
