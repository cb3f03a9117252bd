#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evrender/logstat.hpp"
#include "evrender/scene.hpp"
#include "evrender/tracer.hpp"

namespace evrender {

enum class SimMode { baseline, one_tailed, two_tailed, mean_only };

std::string_view to_string(SimMode mode);
/// Throws std::invalid_argument for unknown names.
SimMode parse_sim_mode(std::string_view name);

struct SimConfig {
    SimMode mode = SimMode::one_tailed;
    int max_samples = 4096;
    int initial_batch = 256;
    int batch = 64;
    double alpha = 0.05;
    std::optional<double> threshold;  // overrides the scene's value
    double luminance_floor = kDefaultLuminanceFloor;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    /// Throws ValidationError.
    void validate() const;
};

/// One DVS event. Frame index is 1-based; polarity is +1 or -1.
struct Event {
    int x = 0;
    int y = 0;
    int frame = 0;
    int polarity = 1;

    bool operator==(const Event&) const = default;
};

using EventStream = std::vector<Event>;

/// Sorts by (frame, y, x), the canonical on-disk order.
void sort_events(EventStream& events);

struct FrameReport {
    int frame = 0;
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> samples;  // paths traced per pixel, row-major
    std::vector<double> mean;            // final working log-luminance mean
    std::vector<double> variance;        // final working log-luminance variance
    std::vector<Event> events;           // events emitted at this frame
    double seconds = 0.0;
    std::uint64_t paths = 0;
};

struct SimResult {
    EventStream events;
    std::vector<FrameReport> frames;  // empty when a sink consumed them
    std::uint64_t total_paths = 0;
    std::uint64_t nonfinite_samples = 0;
    double seconds = 0.0;  // wall clock of the simulation loop
};

enum class SamplingAction { stop, continue_sampling };

/// Early-termination rule checked at each batch boundary. `reference` holds
/// the statistics frozen at the last event, `working` the current frame's.
SamplingAction termination_rule(SimMode mode, const LogLumStats& reference, const LogLumStats& working,
                                double threshold, double alpha);

using FrameSink = std::function<void(const FrameReport&)>;

/// Runs the per-pixel adaptive event detector over every frame. If `sink`
/// is set, each FrameReport is handed to it and not retained in the result.
SimResult simulate(const Scene& scene, const SimConfig& config, const FrameSink& sink = {});

/// Per-frame log-luminance mean images (row-major), index 0 = frame 1.
std::vector<std::vector<double>> render_reference_frames(const Scene& scene, const SimConfig& config);

}  // namespace evrender
