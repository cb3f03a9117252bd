#include "evrender/eventsim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "evrender/error.hpp"
#include "evrender/workers.hpp"

namespace evrender {

std::string_view to_string(SimMode mode) {
    switch (mode) {
        case SimMode::baseline: return "baseline";
        case SimMode::one_tailed: return "one_tailed";
        case SimMode::two_tailed: return "two_tailed";
        case SimMode::mean_only: return "mean_only";
    }
    return "unknown";
}

SimMode parse_sim_mode(std::string_view name) {
    for (SimMode m : {SimMode::baseline, SimMode::one_tailed, SimMode::two_tailed, SimMode::mean_only}) {
        if (to_string(m) == name) return m;
    }
    throw std::invalid_argument("unknown mode \"" + std::string(name) + "\"");
}

void SimConfig::validate() const {
    if (initial_batch < 2) throw ValidationError("initial batch must be >= 2");
    if (max_samples < initial_batch) throw ValidationError("initial batch must not exceed the maximum sample count");
    if (batch < 1) throw ValidationError("increment batch must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    if (threshold && !(std::isfinite(*threshold) && *threshold >= 0.0)) {
        throw ValidationError("threshold must be >= 0");
    }
    if (!(luminance_floor > 0.0)) throw ValidationError("luminance floor must be > 0");
}

void sort_events(EventStream& events) {
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        return std::tie(a.frame, a.y, a.x) < std::tie(b.frame, b.y, b.x);
    });
}

SamplingAction termination_rule(SimMode mode, const LogLumStats& reference, const LogLumStats& working,
                                double threshold, double alpha) {
    switch (mode) {
        case SimMode::baseline:
            return SamplingAction::continue_sampling;
        case SimMode::mean_only:
            return std::abs(working.mean() - reference.mean()) <= threshold ? SamplingAction::stop
                                                                             : SamplingAction::continue_sampling;
        case SimMode::one_tailed: {
            const TestOutcome r = one_tailed_test(reference, working, threshold, alpha);
            return r.decision == Decision::terminate ? SamplingAction::stop : SamplingAction::continue_sampling;
        }
        case SimMode::two_tailed: {
            const TestOutcome r = one_tailed_test(reference, working, threshold, alpha);
            if (r.decision == Decision::terminate) return SamplingAction::stop;
            const double upper = student_t_cdf(-r.t, r.dof);
            return upper < alpha ? SamplingAction::stop : SamplingAction::continue_sampling;
        }
    }
    return SamplingAction::continue_sampling;
}

namespace {

using Clock = std::chrono::steady_clock;

void trace_into(const PathTracer& tracer, Pixel q, std::uint64_t begin, std::uint64_t end, double floor,
                LogLumStats& stats, TraceDiagnostics& diag) {
    for (std::uint64_t i = begin; i < end; ++i) stats.add(log_luminance(tracer.trace(q, i, diag), floor));
}

}  // namespace

SimResult simulate(const Scene& scene, const SimConfig& config, const FrameSink& sink) {
    config.validate();
    const int width = scene.camera.width;
    const int height = scene.camera.height;
    const int frames = scene.camera.frames;
    const double threshold = config.threshold.value_or(scene.threshold);
    const auto pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    const auto max_samples = static_cast<std::uint64_t>(config.max_samples);
    const auto initial = static_cast<std::uint64_t>(config.initial_batch);
    const auto batch = static_cast<std::uint64_t>(config.batch);

    WorkerPool pool(std::max(1u, config.threads));
    std::vector<TraceDiagnostics> diagnostics(pool.size());
    std::vector<LogLumStats> reference(pixels);
    std::vector<std::int8_t> fired(pixels);

    SimResult result;
    const auto sim_start = Clock::now();

    for (int s = 1; s <= frames; ++s) {
        const auto frame_start = Clock::now();
        const PosedScene posed(scene, s);
        const PathTracer tracer(posed, config.seed);

        FrameReport report;
        report.frame = s;
        report.width = width;
        report.height = height;
        report.samples.assign(pixels, 0);
        report.mean.assign(pixels, 0.0);
        report.variance.assign(pixels, 0.0);
        std::fill(fired.begin(), fired.end(), std::int8_t{0});

        const bool full = s == 1 || config.mode == SimMode::baseline;

        pool.parallel_for(static_cast<std::size_t>(height), [&](std::size_t row, unsigned worker) {
            TraceDiagnostics& diag = diagnostics[worker];
            for (int x = 0; x < width; ++x) {
                const std::size_t idx = row * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
                const Pixel q{x, static_cast<int>(row)};
                LogLumStats working;
                std::uint64_t total;
                if (full) {
                    total = max_samples;
                    trace_into(tracer, q, 0, total, config.luminance_floor, working, diag);
                } else {
                    total = initial;
                    trace_into(tracer, q, 0, total, config.luminance_floor, working, diag);
                    while (total < max_samples &&
                           termination_rule(config.mode, reference[idx], working, threshold, config.alpha) ==
                               SamplingAction::continue_sampling) {
                        const std::uint64_t n = std::min(batch, max_samples - total);
                        trace_into(tracer, q, total, total + n, config.luminance_floor, working, diag);
                        total += n;
                    }
                }

                report.samples[idx] = static_cast<std::uint32_t>(total);
                report.mean[idx] = working.mean();
                report.variance[idx] = working.variance();

                if (s == 1) {
                    reference[idx] = working;
                } else {
                    const double gap = working.mean() - reference[idx].mean();
                    if (std::abs(gap) > threshold) {
                        fired[idx] = gap > 0.0 ? 1 : -1;
                        reference[idx] = working;
                    }
                }
            }
        });

        for (std::size_t idx = 0; idx < pixels; ++idx) {
            report.paths += report.samples[idx];
            if (fired[idx] != 0) {
                report.events.push_back({static_cast<int>(idx % static_cast<std::size_t>(width)),
                                         static_cast<int>(idx / static_cast<std::size_t>(width)), s, fired[idx]});
            }
        }
        report.seconds = std::chrono::duration<double>(Clock::now() - frame_start).count();
        result.total_paths += report.paths;
        result.events.insert(result.events.end(), report.events.begin(), report.events.end());
        if (sink) {
            sink(report);
        } else {
            result.frames.push_back(std::move(report));
        }
    }

    result.seconds = std::chrono::duration<double>(Clock::now() - sim_start).count();
    for (const TraceDiagnostics& d : diagnostics) result.nonfinite_samples += d.nonfinite_clamped;
    sort_events(result.events);
    return result;
}

std::vector<std::vector<double>> render_reference_frames(const Scene& scene, const SimConfig& config) {
    std::vector<std::vector<double>> images;
    simulate(scene, config, [&](const FrameReport& r) { images.push_back(r.mean); });
    return images;
}

}  // namespace evrender
