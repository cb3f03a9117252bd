// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>

#include "evrender/evio.hpp"
#include "evrender/eventsim.hpp"
#include "evrender/logstat.hpp"
#include "evrender/metrics.hpp"
#include "evrender/tracer.hpp"
#include "evrender/workers.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace evrender;

namespace {

constexpr std::uint64_t kSeed = 7;

int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("%s  C%-2d %-28s %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* spec, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, spec, args...);
    return buf;
}

Scene sized(const char* name, int size, int frames) {
    Scene scene = load_scene(evtest::scene_path(name));
    scene.camera.width = size;
    scene.camera.height = size;
    scene.camera.frames = frames;
    scene.validate();
    return scene;
}

SimConfig make_config(SimMode mode, int spp, unsigned threads) {
    SimConfig c;
    c.mode = mode;
    c.max_samples = spp;
    c.seed = kSeed;
    c.threads = threads;
    return c;
}

struct Comparison {
    double f1 = 0.0;
    double pscd = 0.0;
};

Comparison compare(const SimResult& test, const SimResult& reference, int w, int h, int n) {
    const SignedPointCloud a = to_point_cloud(test.events, w, h, n);
    const SignedPointCloud b = to_point_cloud(reference.events, w, h, n);
    return {polarity_f1(a, b), signed_chamfer(a, b)};
}

/// Runs of the bundled moving-emitter scene shared by criteria 1, 2, 4, 10.
struct MainExperiment {
    static constexpr int kSize = 100;
    static constexpr int kFrames = 60;
    static constexpr int kSpp = 2048;

    unsigned threads = 1;
    std::map<SimMode, SimResult> runs;

    const SimResult& get(SimMode mode) {
        auto it = runs.find(mode);
        if (it == runs.end()) {
            const Scene scene = sized("two_boxes.json", kSize, kFrames);
            std::printf("      running %s on two_boxes %dx%d, %d frames, %d spp, %u thread(s)\n",
                        std::string(to_string(mode)).c_str(), kSize, kSize, kFrames, kSpp, threads);
            std::fflush(stdout);
            it = runs.emplace(mode, simulate(scene, make_config(mode, kSpp, threads))).first;
            std::printf("      %s: %.1f s, %llu paths, %zu events\n", std::string(to_string(mode)).c_str(),
                        it->second.seconds, static_cast<unsigned long long>(it->second.total_paths),
                        it->second.events.size());
        }
        return it->second;
    }
};

void criterion_1(MainExperiment& ex) {
    const SimResult& base = ex.get(SimMode::baseline);
    const SimResult& ours = ex.get(SimMode::one_tailed);
    const Comparison c = compare(ours, base, ex.kSize, ex.kSize, ex.kFrames);
    report(1, "adaptive fidelity", c.f1 >= 0.85 && c.pscd <= 5e-3,
           fmt("F1 %.4f (>= 0.85), PSCD %.3e (<= 5e-3); baseline %zu events, one_tailed %zu", c.f1, c.pscd,
               base.events.size(), ours.events.size()));
    std::printf("      runtime: baseline %.1f s + one_tailed %.1f s on %u thread(s) (desktop target < 10 min)\n",
                base.seconds, ours.seconds, ex.threads);
}

void criterion_2(MainExperiment& ex) {
    const SimResult& base = ex.get(SimMode::baseline);
    const SimResult& ours = ex.get(SimMode::one_tailed);
    const double speedup = base.seconds / ours.seconds;
    const double ratio = static_cast<double>(ours.total_paths) / static_cast<double>(base.total_paths);
    report(2, "speedup", speedup >= 3.0 && ratio <= 1.0 / 3.0,
           fmt("wall-time speedup %.2fx (>= 3), path ratio %.4f (<= 0.3333)", speedup, ratio));
}

void criterion_3(unsigned threads) {
    constexpr int kFrames = 12;
    constexpr int kSpp = 1024;
    double speedups[2];
    double ratios[2];
    const int sizes[2] = {50, 100};
    for (int i = 0; i < 2; ++i) {
        const Scene scene = sized("low_event.json", sizes[i], kFrames);
        const SimResult base = simulate(scene, make_config(SimMode::baseline, kSpp, threads));
        const SimResult ours = simulate(scene, make_config(SimMode::one_tailed, kSpp, threads));
        speedups[i] = base.seconds / ours.seconds;
        ratios[i] = static_cast<double>(ours.total_paths) / static_cast<double>(base.total_paths);
        std::printf("      low_event %dx%d: baseline %.2f s, one_tailed %.2f s, %zu/%zu events\n", sizes[i],
                    sizes[i], base.seconds, ours.seconds, base.events.size(), ours.events.size());
    }
    const double rel = std::abs(speedups[0] - speedups[1]) / std::min(speedups[0], speedups[1]);
    report(3, "size-invariant speedup", rel <= 0.25,
           fmt("50x50 %.2fx, 100x100 %.2fx, relative gap %.3f (<= 0.25); path ratios %.4f / %.4f", speedups[0],
               speedups[1], rel, ratios[0], ratios[1]));
}

void criterion_4(MainExperiment& ex) {
    const SimResult& base = ex.get(SimMode::baseline);
    const double one = compare(ex.get(SimMode::one_tailed), base, ex.kSize, ex.kSize, ex.kFrames).f1;
    const double two = compare(ex.get(SimMode::two_tailed), base, ex.kSize, ex.kSize, ex.kFrames).f1;
    const double mean = compare(ex.get(SimMode::mean_only), base, ex.kSize, ex.kSize, ex.kFrames).f1;
    report(4, "ablation ordering", two < one && mean <= one,
           fmt("F1 one_tailed %.5f, two_tailed %.5f (< one), mean_only %.5f (<= one)", one, two, mean));
}

void criterion_5(unsigned threads) {
    constexpr int kSize = 40;
    constexpr int kFrames = 8;
    constexpr int kSpp = 2048;
    const Scene scene = sized("static.json", kSize, kFrames);
    bool pass = true;
    std::string detail;
    for (SimMode mode : {SimMode::one_tailed, SimMode::two_tailed, SimMode::mean_only, SimMode::baseline}) {
        const SimResult r = simulate(scene, make_config(mode, kSpp, threads));
        const std::uint32_t expect = mode == SimMode::baseline ? kSpp : 256;
        std::size_t off = 0;
        for (std::size_t f = 1; f < r.frames.size(); ++f) {
            off += std::count_if(r.frames[f].samples.begin(), r.frames[f].samples.end(),
                                 [&](std::uint32_t n) { return n != expect; });
        }
        pass = pass && r.events.empty() && off == 0;
        detail += fmt("%s %zu events/%zu off-count; ", std::string(to_string(mode)).c_str(), r.events.size(), off);
    }
    report(5, "static-scene exactness", pass, detail);
}

void criterion_6() {
    double worst_cdf = 0.0;
    for (double nu : {2.0, 10.0, 255.0, 1e6}) {
        for (int i = -160; i <= 160; ++i) {
            const double t = i * 0.05;
            worst_cdf = std::max(worst_cdf, std::abs(student_t_cdf(t, nu) - evtest::t_cdf_by_quadrature(t, nu)));
        }
    }

    std::mt19937_64 gen(1234);
    std::uniform_int_distribution<int> len(2, 500);
    std::normal_distribution<double> val(0.0, 1.0);
    std::uniform_real_distribution<double> loc(-8.0, 3.0), scale(0.01, 4.0);
    double worst_welford = 0.0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> v(static_cast<std::size_t>(len(gen)));
        const double mu = loc(gen), s = scale(gen);
        for (double& x : v) x = mu + s * val(gen);
        const LogLumStats st = accumulate({}, v);
        const evtest::TwoPass ref = evtest::two_pass(v);
        worst_welford = std::max({worst_welford, evtest::relative_error(st.mean(), ref.mean),
                                  evtest::relative_error(st.variance(), ref.variance)});
    }

    struct Case {
        double mu_a, mu_b, var_a, var_b, theta;
        std::uint64_t n;
    };
    double worst_t = 0.0;
    for (const Case& c : {Case{0.0, 0.6, 0.01, 0.01, 0.5, 256}, Case{0.0, 0.1, 0.02, 0.02, 0.5, 256},
                          Case{0.2, 0.7, 0.3, 0.1, 0.5, 320}}) {
        const double direct = (std::abs(c.mu_b - c.mu_a) - c.theta) / std::sqrt((c.var_a + c.var_b) / c.n);
        const double got = t_statistic(LogLumStats::from_moments(256, c.mu_a, c.var_a),
                                       LogLumStats::from_moments(c.n, c.mu_b, c.var_b), c.theta);
        worst_t = std::max(worst_t, std::abs(got - direct));
    }
    const double ex1 = t_statistic(LogLumStats::from_moments(256, 0.0, 0.01),
                                   LogLumStats::from_moments(256, 0.6, 0.01), 0.5);
    const double ex2 = t_statistic(LogLumStats::from_moments(256, 0.0, 0.02),
                                   LogLumStats::from_moments(256, 0.1, 0.02), 0.5);
    const bool worked = std::abs(ex1 - 11.3137) < 1e-4 && std::abs(ex2 + 32.0) < 1e-12;
    report(6, "statistical kernel oracles",
           worst_cdf < 1e-8 && worst_welford < 1e-10 && worst_t < 1e-12 && worked,
           fmt("cdf max err %.2e (< 1e-8), Welford max rel err %.2e (< 1e-10), t max err %.2e (< 1e-12), "
               "t = %.4f / %.4f",
               worst_cdf, worst_welford, worst_t, ex1, ex2));
}

void criterion_7() {
    constexpr int kSamples = 100000;
    const Scene scene = evtest::furnace_scene(1.0);
    int passed = 0;
    for (int seed = 0; seed < 100; ++seed) {
        LogLumStats s;
        for (const PathSample& p : trace_paths(scene, {2, 2}, 1, kSamples, 0, 1000 + seed)) s.add(p.luminance);
        const double se = std::sqrt(s.variance() / kSamples);
        passed += std::abs(s.mean() - 1.0) < 3.0 * se;
    }
    const Scene direct = evtest::emitter_view_scene(5.0);
    bool exact = true;
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 3; ++x) {
            for (const PathSample& p : trace_paths(direct, {x, y}, 2, 256, 0, 99)) exact = exact && p.luminance == 5.0;
        }
    }
    report(7, "tracer unbiasedness", passed >= 95 && exact,
           fmt("furnace within 3 SE for %d/100 seeds (>= 95); direct emitter exact: %s", passed,
               exact ? "yes" : "no"));
}

std::string render_bytes(const Scene& scene, unsigned threads) {
    SimConfig c = make_config(SimMode::one_tailed, 512, threads);
    const SimResult r = simulate(scene, c);
    std::string bytes = format_events(r.events);
    for (const FrameReport& f : r.frames) {
        const std::vector<float> counts(f.samples.begin(), f.samples.end());
        const std::vector<float> means(f.mean.begin(), f.mean.end());
        bytes += encode_pfm(counts, f.width, f.height);
        bytes += encode_pfm(means, f.width, f.height);
    }
    return bytes;
}

void criterion_8() {
    const Scene scene = sized("two_boxes.json", 32, 6);
    const std::string one = render_bytes(scene, 1);
    const std::string eight = render_bytes(scene, 8);
    report(8, "determinism", one == eight,
           fmt("1 vs 8 workers: %zu vs %zu bytes of events + PFMs, identical: %s", one.size(), eight.size(),
               one == eight ? "yes" : "no"));
}

void criterion_9() {
    std::mt19937_64 gen(99);
    std::uniform_int_distribution<std::size_t> count(0, 200);
    std::uniform_int_distribution<int> x(0, 39), y(0, 29), t(1, 20), p(0, 1);
    const auto make = [&] {
        SignedPointCloud c;
        c.width = 40;
        c.height = 30;
        c.frames = 20;
        const std::size_t n = count(gen);
        for (std::size_t i = 0; i < n; ++i) c.points.push_back({double(x(gen)), double(y(gen)), double(t(gen)), p(gen) ? 1 : -1});
        return c;
    };
    int exact = 0;
    for (int i = 0; i < 100; ++i) {
        const SignedPointCloud a = make();
        const SignedPointCloud b = make();
        exact += polarity_f1(a, b) == evtest::brute_f1(a, b, 2.0) && signed_chamfer(a, b) == evtest::brute_pscd(a, b);
    }

    const auto null = events_to_frames({}, 2, 2, 1);
    const std::vector<Event> one{{1, 0, 1, 1}};
    const FrameErrors e1 = rmse_psnr(events_to_frames(one, 2, 2, 1), null);
    std::vector<Event> all{{0, 0, 1, 1}, {1, 0, 1, 1}, {0, 1, 1, 1}, {1, 1, 1, 1}};
    const FrameErrors e2 = rmse_psnr(events_to_frames(all, 2, 2, 1), null);
    const FrameErrors e0 = rmse_psnr(null, null);
    const bool hand = std::abs(e1.rmse - 0.25) < 1e-9 && std::abs(e1.psnr - 12.041199826559248) < 1e-9 &&
                      std::abs(e2.rmse - 0.5) < 1e-9 && std::abs(e2.psnr - 6.020599913279624) < 1e-9 &&
                      e0.rmse == 0.0 && std::isinf(e0.psnr);
    report(9, "metric oracles", exact == 100 && hand,
           fmt("%d/100 random clouds exact vs brute force; rmse/psnr hand values %s", exact,
               hand ? "match" : "differ"));
}

void criterion_10(MainExperiment& ex) {
    const SimResult& base = ex.get(SimMode::baseline);
    const SimResult& ours = ex.get(SimMode::one_tailed);
    std::map<std::pair<int, int>, int> counts;
    for (const Event& e : base.events) ++counts[{e.x, e.y}];
    if (counts.empty()) {
        report(10, "log-luminance trace", false, "baseline emitted no events");
        return;
    }
    const auto best = std::max_element(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
        return a.second < b.second || (a.second == b.second && a.first > b.first);
    });
    const auto [px, py] = best->first;
    const std::size_t idx = static_cast<std::size_t>(py) * ex.kSize + px;
    int within = 0;
    double worst = 0.0;
    for (std::size_t f = 0; f < base.frames.size(); ++f) {
        const FrameReport& b = base.frames[f];
        const FrameReport& o = ours.frames[f];
        const double se = std::sqrt(b.variance[idx] / b.samples[idx] + o.variance[idx] / o.samples[idx]);
        const double gap = std::abs(b.mean[idx] - o.mean[idx]);
        worst = std::max(worst, se > 0.0 ? gap / se : (gap > 0.0 ? INFINITY : 0.0));
        within += gap <= 3.0 * se;
    }
    const double frac = static_cast<double>(within) / static_cast<double>(base.frames.size());
    report(10, "log-luminance trace", frac >= 0.95,
           fmt("pixel (%d, %d) with %d baseline events: %d/%zu frames within 3 combined SE (%.1f%%, >= 95%%), "
               "worst %.2f SE",
               px, py, best->second, within, base.frames.size(), 100.0 * frac, worst));
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    const auto on = [&](int id) { return wanted.empty() || wanted.count(id) > 0; };

    MainExperiment ex;
    ex.threads = resolve_thread_count(0);
    const auto start = std::chrono::steady_clock::now();

    if (on(6)) criterion_6();
    if (on(9)) criterion_9();
    if (on(7)) criterion_7();
    if (on(8)) criterion_8();
    if (on(5)) criterion_5(ex.threads);
    if (on(3)) criterion_3(ex.threads);
    if (on(1)) criterion_1(ex);
    if (on(2)) criterion_2(ex);
    if (on(4)) criterion_4(ex);
    if (on(10)) criterion_10(ex);

    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s: %d failing criteria, %.1f s total\n", g_failures == 0 ? "ALL PASS" : "FAILURES", g_failures,
                total);
    return g_failures == 0 ? 0 : 1;
}
