#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "evrender/math.hpp"

namespace evrender {

enum class MaterialKind { lambertian, mirror, emitter };

struct Material {
    MaterialKind kind = MaterialKind::lambertian;
    Rgb albedo{0.5, 0.5, 0.5};  // lambertian
    double reflectance = 1.0;   // mirror
    Rgb radiance{};             // emitter, W/(sr m^2)

    static Material lambertian(Rgb albedo) { return {MaterialKind::lambertian, albedo, 1.0, {}}; }
    static Material mirror(double reflectance) { return {MaterialKind::mirror, {}, reflectance, {}}; }
    static Material emitter(Rgb radiance) { return {MaterialKind::emitter, {}, 1.0, radiance}; }
};

/// A pose sample on the normalized [0, 1] timeline. Used for the camera
/// (position + orientation) and for rigid primitive motion (translation +
/// rotation about the world origin).
struct Keyframe {
    double t = 0.0;
    Vec3 position{};
    Quat orientation{};
};

struct Pose {
    Vec3 position{};
    Quat orientation{};
};

/// Interpolates a keyframe track at normalized time u, clamping outside the
/// keyed range. An empty track is the identity pose.
Pose interpolate(const std::vector<Keyframe>& track, double u);

/// Pinhole camera looking down its local -z axis with +y up.
struct Camera {
    std::vector<Keyframe> keyframes;
    double fov = 0.8;  // vertical, radians
    int width = 200;
    int height = 200;
    int frames = 240;
};

struct Sphere {
    Vec3 center{};
    double radius = 1.0;
};

struct Triangle {
    std::array<Vec3, 3> vertices{};
};

struct Primitive {
    std::variant<Sphere, Triangle> shape;
    std::size_t material = 0;
    std::vector<Keyframe> motion;  // empty: static
};

struct Scene {
    Camera camera;
    std::vector<Material> materials;
    std::vector<Primitive> primitives;
    Rgb environment{};
    double threshold = 0.5;  // contrast threshold on log-luminance

    /// Throws ValidationError naming the first violated invariant.
    void validate() const;
};

/// Parses and validates a scene document. `source` names the origin in
/// error messages.
Scene parse_scene(std::string_view json_text, const std::string& source = "<string>");
Scene load_scene(const std::filesystem::path& path);

/// Maps a 1-based frame index onto the normalized timeline.
double frame_time(const Camera& camera, int frame);

struct Ray {
    Vec3 origin{};
    Vec3 direction{};
};

struct PosedCamera {
    Vec3 position{};
    Quat orientation{};
    double fov = 0.8;
    int width = 1;
    int height = 1;

    /// Primary ray through film position (px + u, py + v), row 0 at the top.
    Ray generate_ray(int px, int py, double u, double v) const;
};

/// Camera pose at a 1-based frame index. Throws std::out_of_range.
PosedCamera camera_at(const Scene& scene, int frame);

struct SurfaceHit {
    double t = 0.0;
    Vec3 point{};
    Vec3 normal{};  // geometric normal, unit length, not face-forwarded
    std::size_t material = 0;
    std::size_t primitive = 0;
};

/// Result of a nearest-hit query: either a surface hit or the environment
/// radiance seen along the ray.
struct RayResult {
    std::optional<SurfaceHit> hit;
    Rgb environment{};
};

/// Emitting primitive, posed at one frame.
struct EmitterRef {
    std::size_t primitive = 0;
    Rgb radiance{};
};

/// Scene geometry transformed to one frame. Immutable; shareable across
/// threads.
class PosedScene {
public:
    PosedScene(const Scene& scene, int frame);

    int frame() const { return frame_; }
    const Scene& scene() const { return *scene_; }
    const PosedCamera& camera() const { return camera_; }
    const Rgb& environment() const { return scene_->environment; }
    const Material& material(std::size_t index) const { return scene_->materials[index]; }

    std::optional<SurfaceHit> intersect(const Ray& ray,
                                        double t_max = std::numeric_limits<double>::infinity()) const;
    bool occluded(const Ray& ray, double t_max) const;

    /// Emitting primitives, in scene order.
    const std::vector<EmitterRef>& emitters() const { return emitters_; }

    bool is_sphere(std::size_t primitive) const { return kinds_[primitive] == Kind::sphere; }
    const Sphere& sphere(std::size_t primitive) const { return spheres_[slot_[primitive]].sphere; }
    const Triangle& triangle(std::size_t primitive) const { return triangles_[slot_[primitive]].tri; }
    double triangle_area(std::size_t primitive) const { return triangles_[slot_[primitive]].area; }
    Vec3 triangle_normal(std::size_t primitive) const { return triangles_[slot_[primitive]].normal; }

private:
    enum class Kind : std::uint8_t { sphere, triangle };

    struct PosedSphere {
        Sphere sphere;
        double radius2;
        std::size_t primitive;
    };
    struct PosedTriangle {
        Triangle tri;
        Vec3 edge1;
        Vec3 edge2;
        Vec3 normal;
        double area;
        std::size_t primitive;
    };

    struct BvhNode {
        double lo[3];
        double hi[3];
        std::uint32_t offset;  // first primitive (leaf) or right child (interior)
        std::uint16_t count;   // 0 for interior nodes
        std::uint16_t axis;
    };

    void build_bvh();
    std::uint32_t build_node(std::uint32_t begin, std::uint32_t end, std::vector<double>& bounds);
    double hit_primitive(std::uint32_t primitive, const Ray& ray, double t_max) const;

    const Scene* scene_;
    int frame_;
    PosedCamera camera_;
    std::vector<PosedSphere> spheres_;
    std::vector<PosedTriangle> triangles_;
    std::vector<Kind> kinds_;
    std::vector<std::size_t> slot_;
    std::vector<EmitterRef> emitters_;
    std::vector<BvhNode> nodes_;
    std::vector<std::uint32_t> order_;  // primitive indices in leaf order
};

/// Nearest hit against primitives posed at `frame`; a miss carries the
/// environment radiance.
RayResult intersect(const Scene& scene, int frame, const Ray& ray);

/// Offset applied along the normal to secondary-ray origins.
inline constexpr double kRayEpsilon = 1e-4;

}  // namespace evrender
