#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evrender/rng.hpp"
#include "evrender/scene.hpp"

namespace evrender {

struct Pixel {
    int x = 0;
    int y = 0;
};

/// Single-path luminance estimate f(x)/p(x), reduced to scalar luma.
struct PathSample {
    double luminance = 0.0;
};

struct TraceDiagnostics {
    std::uint64_t nonfinite_clamped = 0;
};

inline constexpr int kMaxPathDepth = 16;
inline constexpr int kRouletteStartDepth = 3;
inline constexpr double kDefaultLuminanceFloor = 1e-3;

/// Unidirectional path tracer over one posed frame. Lambertian vertices use
/// cosine-weighted BSDF sampling plus next-event estimation toward one
/// uniformly chosen emitter (the environment counts as one when nonzero),
/// combined with the balance heuristic.
class PathTracer {
public:
    PathTracer(const PosedScene& scene, std::uint64_t seed);

    /// Luma of one path through pixel q keyed by `sample_index`.
    /// Non-finite estimates are returned as 0 and tallied in `diag`.
    double trace(Pixel q, std::uint64_t sample_index, TraceDiagnostics& diag) const;

private:
    struct LightSample {
        Vec3 direction;
        double distance;  // infinity for the environment
        double pdf;       // solid angle, including emitter selection
        Rgb radiance;
    };

    Rgb radiance(SampleRng& rng, Ray ray) const;
    bool sample_light(SampleRng& rng, const Vec3& point, LightSample& out) const;
    double emitter_pdf(std::size_t primitive, const Vec3& from, const SurfaceHit& hit) const;

    const PosedScene& scene_;
    std::uint64_t seed_;
    bool environment_is_light_;
    std::size_t light_count_;
    double select_pdf_;
};

/// Traces n paths at pixel q of frame s using sample keys
/// start_index .. start_index + n - 1.
std::vector<PathSample> trace_paths(const Scene& scene, Pixel q, int frame, int n,
                                    std::uint64_t start_index, std::uint64_t seed,
                                    TraceDiagnostics* diag = nullptr);

/// ln(max(L, floor)).
double log_luminance(double luminance, double floor);

std::vector<double> log_samples(std::span<const PathSample> samples, double floor);

}  // namespace evrender
