#include "commands.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <map>

#include "evrender/error.hpp"
#include "evrender/evio.hpp"
#include "evrender/metrics.hpp"
#include "evrender/version.hpp"
#include "evrender/workers.hpp"

namespace evrender::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void apply_overrides(Scene& scene, const SimFlags& flags) {
    if (flags.frames) scene.camera.frames = *flags.frames;
    if (flags.width) scene.camera.width = *flags.width;
    if (flags.height) scene.camera.height = *flags.height;
    scene.validate();
}

std::string frame_name(const char* prefix, int frame) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s_%04d.pfm", prefix, frame);
    return buf;
}

json config_to_json(const SimConfig& c, const Scene& scene) {
    return json{{"mode", to_string(c.mode)},
                {"spp", c.max_samples},
                {"init_batch", c.initial_batch},
                {"batch", c.batch},
                {"alpha", c.alpha},
                {"theta", c.threshold.value_or(scene.threshold)},
                {"epsilon", c.luminance_floor},
                {"seed", c.seed},
                {"frames", scene.camera.frames},
                {"width", scene.camera.width},
                {"height", scene.camera.height}};
}

template <typename T>
T field(const json& j, const char* key, const std::string& source) {
    if (!j.contains(key)) throw ParseError(source + ": manifest config is missing \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(source + ": manifest config field \"" + std::string(key) + "\" has the wrong type");
    }
}

/// Restores scene path, flags and the recorded scene hash from a manifest.
RenderOptions options_from_manifest(const RenderOptions& given, std::string& expected_hash) {
    const std::string source = given.manifest.string();
    json m;
    try {
        m = json::parse(read_file(given.manifest));
    } catch (const json::parse_error& e) {
        throw ParseError(source + ": " + e.what());
    }
    if (!m.contains("config") || !m.contains("scene")) throw ParseError(source + ": not a render manifest");
    const json& c = m["config"];
    RenderOptions o = given;
    o.scene = field<std::string>(m["scene"], "path", source);
    expected_hash = field<std::string>(m["scene"], "sha256", source);
    SimConfig& cfg = o.sim.config;
    cfg.mode = parse_sim_mode(field<std::string>(c, "mode", source));
    cfg.max_samples = field<int>(c, "spp", source);
    cfg.initial_batch = field<int>(c, "init_batch", source);
    cfg.batch = field<int>(c, "batch", source);
    cfg.alpha = field<double>(c, "alpha", source);
    cfg.threshold = field<double>(c, "theta", source);
    cfg.luminance_floor = field<double>(c, "epsilon", source);
    cfg.seed = field<std::uint64_t>(c, "seed", source);
    o.sim.frames = field<int>(c, "frames", source);
    o.sim.width = field<int>(c, "width", source);
    o.sim.height = field<int>(c, "height", source);
    return o;
}

/// Simulate-phase seconds and mode recorded in a manifest next to an event
/// file, if one exists.
std::optional<std::pair<std::string, double>> manifest_timing(const fs::path& events) {
    const fs::path path = events.parent_path() / "manifest.json";
    if (!fs::exists(path)) return std::nullopt;
    try {
        const json m = json::parse(read_file(path));
        return std::pair{m.at("config").at("mode").get<std::string>(),
                         m.at("timings").at("simulate_s").get<double>()};
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

}  // namespace

std::string file_sha256(const fs::path& path) {
    const std::string bytes = read_file(path);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int size = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &size, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    std::string hex;
    char pair[3];
    for (unsigned int i = 0; i < size; ++i) {
        std::snprintf(pair, sizeof pair, "%02x", digest[i]);
        hex += pair;
    }
    return hex;
}

int cmd_render(const RenderOptions& given) {
    const auto t_load = std::chrono::steady_clock::now();
    std::string expected_hash;
    const RenderOptions o = given.manifest.empty() ? given : options_from_manifest(given, expected_hash);
    if (o.scene.empty()) throw UserError("render: --scene or --manifest is required");

    Scene scene = load_scene(o.scene);
    const std::string hash = file_sha256(o.scene);
    if (!expected_hash.empty() && hash != expected_hash) {
        throw ValidationError(o.scene.string() + ": scene content differs from the manifest (sha256 " + hash +
                              ", expected " + expected_hash + ")");
    }
    apply_overrides(scene, o.sim);
    SimConfig config = o.sim.config;
    config.threads = resolve_thread_count(config.threads);
    config.validate();
    const double load_s = seconds_since(t_load);

    fs::create_directories(o.out / "samples");
    fs::create_directories(o.out / "mean");
    double write_s = 0.0;
    const FrameSink sink = [&](const FrameReport& f) {
        const auto t = std::chrono::steady_clock::now();
        std::vector<float> counts(f.samples.begin(), f.samples.end());
        std::vector<float> means(f.mean.begin(), f.mean.end());
        write_pfm(o.out / "samples" / frame_name("frame", f.frame), counts, f.width, f.height);
        write_pfm(o.out / "mean" / frame_name("frame", f.frame), means, f.width, f.height);
        write_s += seconds_since(t);
    };
    const SimResult result = simulate(scene, config, sink);

    const auto t_events = std::chrono::steady_clock::now();
    write_events(o.out / "events.csv", result.events);
    write_s += seconds_since(t_events);

    json manifest{
        {"tool", "evrender"},
        {"version", kVersion},
        {"scene", {{"path", fs::absolute(o.scene).lexically_normal().string()}, {"sha256", hash}}},
        {"config", config_to_json(config, scene)},
        {"threads", config.threads},
        {"outputs",
         {{"events", "events.csv"},
          {"samples", "samples/frame_NNNN.pfm"},
          {"mean", "mean/frame_NNNN.pfm"}}},
        {"timings", {{"load_s", load_s}, {"simulate_s", result.seconds}, {"write_s", write_s}}},
        {"total_paths", result.total_paths},
        {"events", result.events.size()},
        {"nonfinite_samples", result.nonfinite_samples}};
    write_file_atomic(o.out / "manifest.json", manifest.dump(2) + "\n");

    std::printf("mode %s: %zu events, %llu paths traced, %.3f s wall\n", std::string(to_string(config.mode)).c_str(),
                result.events.size(), static_cast<unsigned long long>(result.total_paths), result.seconds);
    if (result.nonfinite_samples > 0) {
        std::printf("warning: %llu non-finite path samples clamped to zero\n",
                    static_cast<unsigned long long>(result.nonfinite_samples));
    }
    std::printf("outputs in %s\n", o.out.string().c_str());
    return 0;
}

int cmd_eval(const EvalOptions& o) {
    if (o.width < 1 || o.height < 1 || o.frames < 1) {
        throw ValidationError("eval: --width, --height and --frames must be >= 1");
    }
    const EventStream ref = read_events(o.reference);
    const EventStream test = read_events(o.test);
    const auto check_bounds = [&](const EventStream& events, const fs::path& path) {
        for (const Event& e : events) {
            if (e.x >= o.width || e.y >= o.height || e.frame > o.frames) {
                throw ValidationError(path.string() + ": event (" + std::to_string(e.x) + ", " + std::to_string(e.y) +
                                      ", frame " + std::to_string(e.frame) + ") lies outside " +
                                      std::to_string(o.width) + "x" + std::to_string(o.height) + "x" +
                                      std::to_string(o.frames));
            }
        }
    };
    check_bounds(ref, o.reference);
    check_bounds(test, o.test);

    const auto ref_frames = events_to_frames(ref, o.width, o.height, o.frames);
    const auto test_frames = events_to_frames(test, o.width, o.height, o.frames);
    const FrameErrors errors = rmse_psnr(test_frames, ref_frames);
    const SignedPointCloud ref_cloud = to_point_cloud(ref, o.width, o.height, o.frames);
    const SignedPointCloud test_cloud = to_point_cloud(test, o.width, o.height, o.frames);

    ModeMetrics row;
    row.mode = o.test.stem().string();
    row.rmse = errors.rmse;
    row.psnr = errors.psnr;
    row.f1 = polarity_f1(test_cloud, ref_cloud, o.tau);
    row.pscd = signed_chamfer(test_cloud, ref_cloud);

    MetricReport report;
    if (const auto t = manifest_timing(o.reference)) report.baseline_seconds = t->second;
    if (const auto t = manifest_timing(o.test)) {
        row.mode = t->first;
        row.seconds = t->second;
    }
    report.rows.push_back(row);

    std::fputs(format_report_table(report).c_str(), stdout);
    if (!o.out.empty()) write_report(o.out, report);
    return 0;
}

int cmd_bench(const BenchOptions& o) {
    if (o.resolutions.empty()) throw ValidationError("bench: at least one resolution is required");
    std::vector<SimMode> modes{SimMode::baseline};
    for (const std::string& name : o.modes) {
        const SimMode m = parse_sim_mode(name);
        if (m != SimMode::baseline) modes.push_back(m);
    }
    const Scene loaded = load_scene(o.scene);
    SimConfig config = o.sim.config;
    config.threads = resolve_thread_count(config.threads);

    std::string csv = "resolution,mode,time_s,paths,events,speedup\n";
    char line[160];
    for (const int res : o.resolutions) {
        Scene scene = loaded;
        SimFlags flags = o.sim;
        flags.width = res;
        flags.height = res;
        apply_overrides(scene, flags);
        double baseline_s = 0.0;
        for (const SimMode mode : modes) {
            config.mode = mode;
            config.validate();
            const SimResult r = simulate(scene, config, [](const FrameReport&) {});
            if (mode == SimMode::baseline) baseline_s = r.seconds;
            const double ratio = r.seconds > 0.0 ? baseline_s / r.seconds : 1.0;
            std::snprintf(line, sizeof line, "%dx%d,%s,%.6f,%llu,%zu,%s\n", res, res,
                          std::string(to_string(mode)).c_str(), r.seconds,
                          static_cast<unsigned long long>(r.total_paths), r.events.size(),
                          format_speedup(mode == SimMode::baseline ? 1.0 : ratio).c_str());
            csv += line;
            std::fputs(line, stdout);
            std::fflush(stdout);
        }
    }
    write_file_atomic(o.out, csv);
    return 0;
}

}  // namespace evrender::cli
