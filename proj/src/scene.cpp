#include "evrender/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "evrender/error.hpp"

namespace evrender {

namespace {
constexpr double kNoHit = std::numeric_limits<double>::infinity();
}

Pose interpolate(const std::vector<Keyframe>& track, double u) {
    if (track.empty()) return {};
    if (u <= track.front().t) return {track.front().position, track.front().orientation};
    if (u >= track.back().t) return {track.back().position, track.back().orientation};
    std::size_t i = 1;
    while (track[i].t < u) ++i;
    const Keyframe& a = track[i - 1];
    const Keyframe& b = track[i];
    const double w = (u - a.t) / (b.t - a.t);
    return {lerp(a.position, b.position, w), slerp(a.orientation, b.orientation, w)};
}

namespace {

void check(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

bool finite_nonnegative(const Rgb& c) {
    return std::isfinite(c.r) && std::isfinite(c.g) && std::isfinite(c.b) && c.r >= 0.0 &&
           c.g >= 0.0 && c.b >= 0.0;
}

bool in_unit_range(const Rgb& c) {
    return c.r >= 0.0 && c.r <= 1.0 && c.g >= 0.0 && c.g <= 1.0 && c.b >= 0.0 && c.b <= 1.0;
}

void validate_track(const std::vector<Keyframe>& track, const std::string& what) {
    for (std::size_t i = 0; i < track.size(); ++i) {
        const Keyframe& k = track[i];
        check(k.t >= 0.0 && k.t <= 1.0, what + " keyframe time outside [0, 1]");
        check(i == 0 || k.t > track[i - 1].t, what + " keyframe times not strictly increasing");
        check(std::abs(k.orientation.norm() - 1.0) <= 1e-6, what + " quaternion not unit-norm");
    }
}

}  // namespace

void Scene::validate() const {
    check(camera.width >= 1, "camera width must be >= 1");
    check(camera.height >= 1, "camera height must be >= 1");
    check(camera.frames >= 2, "frame count must be >= 2");
    check(camera.fov > 0.0 && camera.fov < kPi, "fov out of range");
    check(!camera.keyframes.empty(), "camera needs at least one keyframe");
    validate_track(camera.keyframes, "camera");

    for (const Material& m : materials) {
        switch (m.kind) {
            case MaterialKind::lambertian:
                check(in_unit_range(m.albedo), "albedo components must lie in [0, 1]");
                break;
            case MaterialKind::mirror:
                check(m.reflectance >= 0.0 && m.reflectance <= 1.0, "reflectance must lie in [0, 1]");
                break;
            case MaterialKind::emitter:
                check(finite_nonnegative(m.radiance), "emitter radiance must be finite and >= 0");
                break;
        }
    }

    for (const Primitive& p : primitives) {
        check(p.material < materials.size(), "primitive references unknown material");
        if (const auto* s = std::get_if<Sphere>(&p.shape)) {
            check(s->radius > 0.0, "sphere radius must be > 0");
        } else {
            const auto& v = std::get<Triangle>(p.shape).vertices;
            const double area = 0.5 * length(cross(v[1] - v[0], v[2] - v[0]));
            check(area > 1e-12, "triangle vertices are collinear");
        }
        validate_track(p.motion, "primitive motion");
    }

    check(finite_nonnegative(environment), "environment radiance must be finite and >= 0");
    check(!primitives.empty() || !environment.is_black(),
          "scene needs at least one primitive or a nonzero environment");
    check(std::isfinite(threshold) && threshold >= 0.0, "threshold must be >= 0");
}

double frame_time(const Camera& camera, int frame) {
    return static_cast<double>(frame - 1) / static_cast<double>(camera.frames - 1);
}

PosedCamera camera_at(const Scene& scene, int frame) {
    if (frame < 1 || frame > scene.camera.frames) {
        throw std::out_of_range("frame index " + std::to_string(frame) + " outside [1, " +
                                std::to_string(scene.camera.frames) + "]");
    }
    const Pose pose = interpolate(scene.camera.keyframes, frame_time(scene.camera, frame));
    return {pose.position, pose.orientation, scene.camera.fov, scene.camera.width, scene.camera.height};
}

Ray PosedCamera::generate_ray(int px, int py, double u, double v) const {
    const double tan_half = std::tan(0.5 * fov);
    const double aspect = static_cast<double>(width) / static_cast<double>(height);
    const double sx = (2.0 * (px + u) / width - 1.0) * tan_half * aspect;
    const double sy = (1.0 - 2.0 * (py + v) / height) * tan_half;
    return {position, normalize(orientation.rotate({sx, sy, -1.0}))};
}

PosedScene::PosedScene(const Scene& scene, int frame)
    : scene_(&scene), frame_(frame), camera_(camera_at(scene, frame)) {
    const double u = frame_time(scene.camera, frame);
    kinds_.reserve(scene.primitives.size());
    slot_.reserve(scene.primitives.size());
    for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
        const Primitive& prim = scene.primitives[i];
        const Pose pose = interpolate(prim.motion, u);
        const auto place = [&](const Vec3& p) { return pose.orientation.rotate(p) + pose.position; };

        if (const auto* s = std::get_if<Sphere>(&prim.shape)) {
            kinds_.push_back(Kind::sphere);
            slot_.push_back(spheres_.size());
            spheres_.push_back({{place(s->center), s->radius}, s->radius * s->radius, i});
        } else {
            const auto& v = std::get<Triangle>(prim.shape).vertices;
            PosedTriangle t;
            t.tri.vertices = {place(v[0]), place(v[1]), place(v[2])};
            t.edge1 = t.tri.vertices[1] - t.tri.vertices[0];
            t.edge2 = t.tri.vertices[2] - t.tri.vertices[0];
            const Vec3 c = cross(t.edge1, t.edge2);
            t.area = 0.5 * length(c);
            t.normal = normalize(c);
            t.primitive = i;
            kinds_.push_back(Kind::triangle);
            slot_.push_back(triangles_.size());
            triangles_.push_back(t);
        }

        const Material& m = scene.materials[prim.material];
        if (m.kind == MaterialKind::emitter && !m.radiance.is_black()) {
            emitters_.push_back({i, m.radiance});
        }
    }
    build_bvh();
}

namespace {

double hit_sphere(const Sphere& s, double radius2, const Ray& ray) {
    const Vec3 oc = ray.origin - s.center;
    const double b = dot(oc, ray.direction);
    const double c = dot(oc, oc) - radius2;
    const double disc = b * b - c;
    // Tangent rays (zero discriminant) are misses.
    if (disc <= 0.0) return kNoHit;
    const double root = std::sqrt(disc);
    const double t = -b - root;
    if (t > 0.0) return t;
    const double t_far = -b + root;
    return t_far > 0.0 ? t_far : kNoHit;
}

double hit_triangle(const Vec3& v0, const Vec3& edge1, const Vec3& edge2, const Ray& ray) {
    const Vec3 pvec = cross(ray.direction, edge2);
    const double det = dot(edge1, pvec);
    if (std::abs(det) < 1e-14) return kNoHit;
    const double inv = 1.0 / det;
    const Vec3 tvec = ray.origin - v0;
    const double u = dot(tvec, pvec) * inv;
    if (u < 0.0 || u > 1.0) return kNoHit;
    const Vec3 qvec = cross(tvec, edge1);
    const double v = dot(ray.direction, qvec) * inv;
    if (v < 0.0 || u + v > 1.0) return kNoHit;
    const double t = dot(edge2, qvec) * inv;
    return t > 0.0 ? t : kNoHit;
}

struct RayBoxTest {
    Vec3 origin;
    double inv[3];
    bool negative[3];

    explicit RayBoxTest(const Ray& ray) : origin(ray.origin) {
        const double d[3] = {ray.direction.x, ray.direction.y, ray.direction.z};
        for (int k = 0; k < 3; ++k) {
            inv[k] = 1.0 / d[k];
            negative[k] = d[k] < 0.0;
        }
    }

    bool hits(const double lo[3], const double hi[3], double t_max) const {
        const double o[3] = {origin.x, origin.y, origin.z};
        double t0 = 0.0;
        double t1 = t_max;
        for (int k = 0; k < 3; ++k) {
            double near = (lo[k] - o[k]) * inv[k];
            double far = (hi[k] - o[k]) * inv[k];
            if (near > far) std::swap(near, far);
            // Pad the exit so grazing hits on flat boxes survive rounding.
            far *= 1.0 + 4e-16 * 4;
            t0 = near > t0 ? near : t0;
            t1 = far < t1 ? far : t1;
            if (t0 > t1) return false;
        }
        return true;
    }
};

}  // namespace

void PosedScene::build_bvh() {
    const auto count = static_cast<std::uint32_t>(kinds_.size());
    order_.resize(count);
    std::vector<double> bounds(static_cast<std::size_t>(count) * 9);
    for (std::uint32_t i = 0; i < count; ++i) {
        order_[i] = i;
        double* b = &bounds[static_cast<std::size_t>(i) * 9];
        if (kinds_[i] == Kind::sphere) {
            const Sphere& s = spheres_[slot_[i]].sphere;
            const double c[3] = {s.center.x, s.center.y, s.center.z};
            for (int k = 0; k < 3; ++k) {
                b[k] = c[k] - s.radius;
                b[3 + k] = c[k] + s.radius;
            }
        } else {
            const auto& v = triangles_[slot_[i]].tri.vertices;
            b[0] = std::min({v[0].x, v[1].x, v[2].x});
            b[1] = std::min({v[0].y, v[1].y, v[2].y});
            b[2] = std::min({v[0].z, v[1].z, v[2].z});
            b[3] = std::max({v[0].x, v[1].x, v[2].x});
            b[4] = std::max({v[0].y, v[1].y, v[2].y});
            b[5] = std::max({v[0].z, v[1].z, v[2].z});
        }
        for (int k = 0; k < 3; ++k) b[6 + k] = 0.5 * (b[k] + b[3 + k]);
    }
    nodes_.clear();
    if (count > 0) build_node(0, count, bounds);
}

std::uint32_t PosedScene::build_node(std::uint32_t begin, std::uint32_t end, std::vector<double>& bounds) {
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    BvhNode node{};
    double clo[3], chi[3];
    for (int k = 0; k < 3; ++k) {
        node.lo[k] = clo[k] = std::numeric_limits<double>::infinity();
        node.hi[k] = chi[k] = -std::numeric_limits<double>::infinity();
    }
    for (std::uint32_t i = begin; i < end; ++i) {
        const double* b = &bounds[static_cast<std::size_t>(order_[i]) * 9];
        for (int k = 0; k < 3; ++k) {
            node.lo[k] = std::min(node.lo[k], b[k]);
            node.hi[k] = std::max(node.hi[k], b[3 + k]);
            clo[k] = std::min(clo[k], b[6 + k]);
            chi[k] = std::max(chi[k], b[6 + k]);
        }
    }
    // Exhaustive surface-area-heuristic sweep; scenes here hold few primitives.
    const std::uint32_t n = end - begin;
    const auto area = [](const double* lo, const double* hi) {
        const double dx = hi[0] - lo[0], dy = hi[1] - lo[1], dz = hi[2] - lo[2];
        return dx * dy + dy * dz + dz * dx;
    };
    int axis = -1;
    std::uint32_t split = 0;
    double best_cost = area(node.lo, node.hi) * static_cast<double>(n);
    std::vector<std::uint32_t> sorted(order_.begin() + begin, order_.begin() + end);
    std::vector<double> right_area(n);
    for (int k = 0; k < 3; ++k) {
        if (chi[k] <= clo[k]) continue;
        std::sort(sorted.begin(), sorted.end(), [&](std::uint32_t a, std::uint32_t b) {
            const double ca = bounds[static_cast<std::size_t>(a) * 9 + 6 + k];
            const double cb = bounds[static_cast<std::size_t>(b) * 9 + 6 + k];
            return ca < cb || (ca == cb && a < b);
        });
        double lo[3], hi[3];
        const auto reset = [&] {
            for (int j = 0; j < 3; ++j) {
                lo[j] = std::numeric_limits<double>::infinity();
                hi[j] = -std::numeric_limits<double>::infinity();
            }
        };
        const auto grow = [&](std::uint32_t prim) {
            const double* b = &bounds[static_cast<std::size_t>(prim) * 9];
            for (int j = 0; j < 3; ++j) {
                lo[j] = std::min(lo[j], b[j]);
                hi[j] = std::max(hi[j], b[3 + j]);
            }
        };
        reset();
        for (std::uint32_t i = n; i-- > 1;) {
            grow(sorted[i]);
            right_area[i] = area(lo, hi);
        }
        reset();
        for (std::uint32_t i = 1; i < n; ++i) {
            grow(sorted[i - 1]);
            const double cost = area(lo, hi) * i + right_area[i] * (n - i) + area(node.lo, node.hi) * 0.125;
            if (cost < best_cost) {
                best_cost = cost;
                axis = k;
                split = i;
            }
        }
    }
    if (n <= 1 || axis < 0) {
        node.offset = begin;
        node.count = static_cast<std::uint16_t>(n);
        nodes_[index] = node;
        return index;
    }
    std::sort(order_.begin() + begin, order_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
        const double ca = bounds[static_cast<std::size_t>(a) * 9 + 6 + axis];
        const double cb = bounds[static_cast<std::size_t>(b) * 9 + 6 + axis];
        return ca < cb || (ca == cb && a < b);
    });
    const std::uint32_t mid = begin + split;
    build_node(begin, mid, bounds);
    node.offset = build_node(mid, end, bounds);
    node.count = 0;
    node.axis = static_cast<std::uint16_t>(axis);
    nodes_[index] = node;
    return index;
}

double PosedScene::hit_primitive(std::uint32_t primitive, const Ray& ray, double) const {
    if (kinds_[primitive] == Kind::sphere) {
        const PosedSphere& s = spheres_[slot_[primitive]];
        return hit_sphere(s.sphere, s.radius2, ray);
    }
    const PosedTriangle& t = triangles_[slot_[primitive]];
    return hit_triangle(t.tri.vertices[0], t.edge1, t.edge2, ray);
}

std::optional<SurfaceHit> PosedScene::intersect(const Ray& ray, double t_max) const {
    if (nodes_.empty()) return std::nullopt;
    const RayBoxTest box(ray);
    double best = t_max;
    std::uint32_t best_prim = std::numeric_limits<std::uint32_t>::max();
    std::uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const BvhNode& node = nodes_[stack[--top]];
        if (!box.hits(node.lo, node.hi, best)) continue;
        if (node.count > 0) {
            for (std::uint32_t i = node.offset; i < node.offset + node.count; ++i) {
                const std::uint32_t p = order_[i];
                const double t = hit_primitive(p, ray, best);
                if (t < best || (t == best && t != kNoHit && p < best_prim)) {
                    best = t;
                    best_prim = p;
                }
            }
        } else {
            const auto left = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
            if (box.negative[node.axis]) {
                stack[top++] = left;
                stack[top++] = node.offset;
            } else {
                stack[top++] = node.offset;
                stack[top++] = left;
            }
        }
    }
    if (best_prim == std::numeric_limits<std::uint32_t>::max()) return std::nullopt;

    SurfaceHit hit;
    hit.t = best;
    hit.point = ray.origin + ray.direction * best;
    hit.primitive = best_prim;
    if (kinds_[best_prim] == Kind::sphere) {
        const Sphere& s = spheres_[slot_[best_prim]].sphere;
        hit.normal = (hit.point - s.center) / s.radius;
    } else {
        hit.normal = triangles_[slot_[best_prim]].normal;
    }
    hit.material = scene_->primitives[best_prim].material;
    return hit;
}

bool PosedScene::occluded(const Ray& ray, double t_max) const {
    if (nodes_.empty()) return false;
    const RayBoxTest box(ray);
    std::uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const BvhNode& node = nodes_[stack[--top]];
        if (!box.hits(node.lo, node.hi, t_max)) continue;
        if (node.count > 0) {
            for (std::uint32_t i = node.offset; i < node.offset + node.count; ++i) {
                if (hit_primitive(order_[i], ray, t_max) < t_max) return true;
            }
        } else {
            stack[top++] = node.offset;
            stack[top++] = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
        }
    }
    return false;
}

RayResult intersect(const Scene& scene, int frame, const Ray& ray) {
    const PosedScene posed(scene, frame);
    RayResult result;
    result.hit = posed.intersect(ray);
    if (!result.hit) result.environment = scene.environment;
    return result;
}

}  // namespace evrender
