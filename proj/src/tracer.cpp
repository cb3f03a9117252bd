#include "evrender/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace evrender {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec3 to_world(const Vec3& local, const Vec3& n) {
    Vec3 t, b;
    make_basis(n, t, b);
    return t * local.x + b * local.y + n * local.z;
}

Vec3 cosine_hemisphere(double u1, double u2) {
    const double r = std::sqrt(u1);
    const double phi = 2.0 * kPi * u2;
    return {r * std::cos(phi), r * std::sin(phi), std::sqrt(std::max(0.0, 1.0 - u1))};
}

Vec3 uniform_sphere(double u1, double u2) {
    const double z = 1.0 - 2.0 * u1;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * kPi * u2;
    return {r * std::cos(phi), r * std::sin(phi), z};
}

/// Solid angle subtended by a sphere of radius r at distance d > r, as
/// 1 - cos(theta_max), evaluated without cancellation.
double cone_extent(double r, double d) {
    const double sin2 = (r * r) / (d * d);
    const double cos_max = std::sqrt(std::max(0.0, 1.0 - sin2));
    return sin2 / (1.0 + cos_max);
}

double nearest_sphere_distance(const Vec3& origin, const Vec3& dir, const Sphere& s) {
    const Vec3 oc = origin - s.center;
    const double b = dot(oc, dir);
    const double c = dot(oc, oc) - s.radius * s.radius;
    const double disc = b * b - c;
    if (disc <= 0.0) return -b;  // grazing direction from the cone edge
    const double root = std::sqrt(disc);
    const double t = -b - root;
    return t > 0.0 ? t : -b + root;
}

}  // namespace

PathTracer::PathTracer(const PosedScene& scene, std::uint64_t seed)
    : scene_(scene),
      seed_(seed),
      environment_is_light_(!scene.environment().is_black()),
      light_count_(scene.emitters().size() + (environment_is_light_ ? 1 : 0)),
      select_pdf_(light_count_ > 0 ? 1.0 / static_cast<double>(light_count_) : 0.0) {}

double PathTracer::trace(Pixel q, std::uint64_t sample_index, TraceDiagnostics& diag) const {
    SampleRng rng(RngKey{seed_, static_cast<std::uint32_t>(q.x), static_cast<std::uint32_t>(q.y),
                         static_cast<std::uint32_t>(scene_.frame()), sample_index});
    const double u = rng.uniform();
    const double v = rng.uniform();
    const double l = luma(radiance(rng, scene_.camera().generate_ray(q.x, q.y, u, v)));
    if (!std::isfinite(l)) {
        ++diag.nonfinite_clamped;
        return 0.0;
    }
    return std::max(0.0, l);
}

bool PathTracer::sample_light(SampleRng& rng, const Vec3& point, LightSample& out) const {
    if (light_count_ == 0) return false;
    const auto& emitters = scene_.emitters();
    const std::size_t k = std::min(static_cast<std::size_t>(rng.uniform() * light_count_), light_count_ - 1);
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();

    if (k == emitters.size()) {
        out.direction = uniform_sphere(u1, u2);
        out.distance = kInf;
        out.pdf = select_pdf_ / (4.0 * kPi);
        out.radiance = scene_.environment();
        return true;
    }

    const EmitterRef& e = emitters[k];
    out.radiance = e.radiance;
    if (scene_.is_sphere(e.primitive)) {
        const Sphere& s = scene_.sphere(e.primitive);
        const Vec3 to_center = s.center - point;
        const double d = length(to_center);
        if (d <= s.radius) return false;
        const Vec3 w = to_center / d;
        const double extent = cone_extent(s.radius, d);
        const double cos_t = 1.0 - u1 * extent;
        const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
        const double phi = 2.0 * kPi * u2;
        out.direction = normalize(to_world({sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t}, w));
        out.distance = nearest_sphere_distance(point, out.direction, s);
        out.pdf = select_pdf_ / (2.0 * kPi * extent);
        return true;
    }

    const auto& v = scene_.triangle(e.primitive).vertices;
    const double su = std::sqrt(u1);
    const double b0 = 1.0 - su;
    const double b1 = u2 * su;
    const Vec3 target = v[0] * b0 + v[1] * b1 + v[2] * (1.0 - b0 - b1);
    const Vec3 delta = target - point;
    const double dist2 = dot(delta, delta);
    const double dist = std::sqrt(dist2);
    if (dist == 0.0) return false;
    out.direction = delta / dist;
    const double cos_light = std::abs(dot(scene_.triangle_normal(e.primitive), out.direction));
    if (cos_light <= 1e-12) return false;
    out.distance = dist;
    out.pdf = select_pdf_ * dist2 / (cos_light * scene_.triangle_area(e.primitive));
    return true;
}

double PathTracer::emitter_pdf(std::size_t primitive, const Vec3& from, const SurfaceHit& hit) const {
    if (scene_.is_sphere(primitive)) {
        const Sphere& s = scene_.sphere(primitive);
        const double d = length(s.center - from);
        if (d <= s.radius) return 0.0;
        return select_pdf_ / (2.0 * kPi * cone_extent(s.radius, d));
    }
    const Vec3 delta = hit.point - from;
    const double dist2 = dot(delta, delta);
    const double cos_light = std::abs(dot(hit.normal, delta)) / std::sqrt(dist2);
    if (cos_light <= 1e-12) return 0.0;
    return select_pdf_ * dist2 / (cos_light * scene_.triangle_area(primitive));
}

Rgb PathTracer::radiance(SampleRng& rng, Ray ray) const {
    Rgb result;
    Rgb throughput{1.0, 1.0, 1.0};
    bool specular = true;  // camera and mirror vertices are not light-sampled
    double bsdf_pdf = 0.0;
    Vec3 prev_point;

    for (int depth = 0; depth < kMaxPathDepth; ++depth) {
        const auto hit = scene_.intersect(ray);
        if (!hit) {
            const Rgb& env = scene_.environment();
            if (!env.is_black()) {
                double w = 1.0;
                if (!specular) {
                    const double light_pdf = select_pdf_ / (4.0 * kPi);
                    w = bsdf_pdf / (bsdf_pdf + light_pdf);
                }
                result += throughput * env * w;
            }
            break;
        }

        const Material& m = scene_.material(hit->material);
        if (m.kind == MaterialKind::emitter) {
            double w = 1.0;
            if (!specular) {
                const double light_pdf = emitter_pdf(hit->primitive, prev_point, *hit);
                w = bsdf_pdf / (bsdf_pdf + light_pdf);
            }
            result += throughput * m.radiance * w;
            break;
        }

        const Vec3 n = dot(hit->normal, ray.direction) < 0.0 ? hit->normal : -hit->normal;
        const Vec3 origin = hit->point + n * kRayEpsilon;
        double survival = 1.0;

        if (m.kind == MaterialKind::mirror) {
            throughput = throughput * m.reflectance;
            ray = {origin, normalize(ray.direction - n * (2.0 * dot(ray.direction, n)))};
            specular = true;
            survival = m.reflectance;
        } else {
            const Rgb brdf = m.albedo * kInvPi;
            LightSample ls;
            if (sample_light(rng, origin, ls)) {
                const double cos_s = dot(n, ls.direction);
                if (cos_s > 0.0 && !scene_.occluded({origin, ls.direction}, ls.distance - 1e-6)) {
                    const double pdf_b = cos_s * kInvPi;
                    const double w = ls.pdf / (ls.pdf + pdf_b);
                    result += throughput * brdf * ls.radiance * (cos_s * w / ls.pdf);
                }
            }

            const Vec3 local = cosine_hemisphere(rng.uniform(), rng.uniform());
            throughput = throughput * m.albedo;
            bsdf_pdf = local.z * kInvPi;
            prev_point = origin;
            ray = {origin, normalize(to_world(local, n))};
            specular = false;
            survival = m.albedo.max_component();
        }

        if (depth >= kRouletteStartDepth) {
            const double q = std::min(1.0, survival);
            if (q <= 0.0 || rng.uniform() >= q) break;
            throughput = throughput * (1.0 / q);
        }
    }
    return result;
}

std::vector<PathSample> trace_paths(const Scene& scene, Pixel q, int frame, int n,
                                    std::uint64_t start_index, std::uint64_t seed,
                                    TraceDiagnostics* diag) {
    if (n < 1) throw std::invalid_argument("trace_paths: n must be >= 1");
    if (q.x < 0 || q.y < 0 || q.x >= scene.camera.width || q.y >= scene.camera.height) {
        throw std::out_of_range("trace_paths: pixel outside the film");
    }
    const PosedScene posed(scene, frame);
    const PathTracer tracer(posed, seed);
    TraceDiagnostics local;
    std::vector<PathSample> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back({tracer.trace(q, start_index + static_cast<std::uint64_t>(i), local)});
    if (diag != nullptr) diag->nonfinite_clamped += local.nonfinite_clamped;
    return out;
}

double log_luminance(double luminance, double floor) {
    return std::log(luminance > floor ? luminance : floor);
}

std::vector<double> log_samples(std::span<const PathSample> samples, double floor) {
    if (!(floor > 0.0)) throw std::invalid_argument("log_samples: floor must be > 0");
    std::vector<double> out;
    out.reserve(samples.size());
    for (const PathSample& s : samples) out.push_back(log_luminance(s.luminance, floor));
    return out;
}

}  // namespace evrender
