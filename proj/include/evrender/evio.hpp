#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evrender/eventsim.hpp"

namespace evrender {

// Event files are CSV with the header `s,x,y,p` and one event per line,
// sorted by (s, y, x), plain decimal integers.

/// Writes the stream in canonical order (a sorted copy).
void write_events(const std::filesystem::path& path, std::span<const Event> events);
std::string format_events(std::span<const Event> events);

/// Throws ParseError with the offending line number, IoError on I/O failure.
EventStream read_events(const std::filesystem::path& path);
EventStream parse_events(std::string_view text, const std::string& source = "<string>");

/// Single-channel float image, row-major, row 0 at the top.
struct FloatImage {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;
};

/// Grayscale little-endian PFM ("Pf", scale -1.0, rows stored bottom to
/// top). Throws std::invalid_argument before writing if any value is not
/// finite.
void write_pfm(const std::filesystem::path& path, std::span<const float> pixels, int width, int height);
std::string encode_pfm(std::span<const float> pixels, int width, int height);

FloatImage read_pfm(const std::filesystem::path& path);
FloatImage decode_pfm(std::string_view bytes, const std::string& source = "<bytes>");

/// One column block of the metric report. Metric fields are absent for the
/// reference run itself.
struct ModeMetrics {
    std::string mode;
    std::optional<double> rmse;
    std::optional<double> psnr;
    std::optional<double> f1;
    std::optional<double> pscd;
    std::optional<double> seconds;
};

struct MetricReport {
    std::optional<double> baseline_seconds;
    std::vector<ModeMetrics> rows;
};

/// "8.00×"
std::string format_speedup(double ratio);
std::optional<double> speedup(const MetricReport& report, const ModeMetrics& row);

std::string format_report_csv(const MetricReport& report);
/// Aligned table: per mode RMSE, PSNR, F1 score, PSCD, Time, Speed up.
std::string format_report_table(const MetricReport& report);

/// Writes the CSV to `path` and the aligned table next to it with a .txt
/// extension.
void write_report(const std::filesystem::path& path, const MetricReport& report);

/// Writes via a temporary sibling and rename, so readers never observe a
/// partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace evrender
