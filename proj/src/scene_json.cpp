#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "evrender/error.hpp"
#include "evrender/scene.hpp"
#include "json.hpp"

namespace evrender {

namespace {

using json = nlohmann::json;

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& field, const std::string& message) const {
        throw ParseError(source_ + ": " + field + ": " + message);
    }

    const json& member(const json& obj, const std::string& key, const std::string& field) const {
        if (!obj.is_object()) fail(field, "expected an object");
        const auto it = obj.find(key);
        if (it == obj.end()) fail(field + "." + key, "missing required field");
        return *it;
    }

    double number(const json& v, const std::string& field) const {
        if (!v.is_number()) fail(field, "expected a number");
        return v.get<double>();
    }

    int integer(const json& v, const std::string& field) const {
        if (!v.is_number_integer()) fail(field, "expected an integer");
        return v.get<int>();
    }

    Vec3 vec3(const json& v, const std::string& field) const {
        if (!v.is_array() || v.size() != 3) fail(field, "expected [x, y, z]");
        return {number(v[0], field + "[0]"), number(v[1], field + "[1]"), number(v[2], field + "[2]")};
    }

    Quat quat(const json& v, const std::string& field) const {
        if (!v.is_array() || v.size() != 4) fail(field, "expected [w, x, y, z]");
        return {number(v[0], field + "[0]"), number(v[1], field + "[1]"), number(v[2], field + "[2]"),
                number(v[3], field + "[3]")};
    }

    /// A bare number is shorthand for a grey triple.
    Rgb rgb(const json& v, const std::string& field) const {
        if (v.is_number()) {
            const double g = v.get<double>();
            return {g, g, g};
        }
        if (!v.is_array() || v.size() != 3) fail(field, "expected a number or [r, g, b]");
        return {number(v[0], field + "[0]"), number(v[1], field + "[1]"), number(v[2], field + "[2]")};
    }

private:
    std::string source_;
};

Quat look_rotation(const Vec3& eye, const Vec3& target, const Vec3& up) {
    const Vec3 f = normalize(target - eye);
    const Vec3 r = normalize(cross(f, up));
    const Vec3 u = cross(r, f);
    // Columns of the camera-to-world rotation: r, u, -f.
    const double m00 = r.x, m01 = u.x, m02 = -f.x;
    const double m10 = r.y, m11 = u.y, m12 = -f.y;
    const double m20 = r.z, m21 = u.z, m22 = -f.z;
    const double trace = m00 + m11 + m22;
    Quat q;
    if (trace > 0.0) {
        const double s = 0.5 / std::sqrt(trace + 1.0);
        q = {0.25 / s, (m21 - m12) * s, (m02 - m20) * s, (m10 - m01) * s};
    } else if (m00 > m11 && m00 > m22) {
        const double s = 2.0 * std::sqrt(1.0 + m00 - m11 - m22);
        q = {(m21 - m12) / s, 0.25 * s, (m01 + m10) / s, (m02 + m20) / s};
    } else if (m11 > m22) {
        const double s = 2.0 * std::sqrt(1.0 + m11 - m00 - m22);
        q = {(m02 - m20) / s, (m01 + m10) / s, 0.25 * s, (m12 + m21) / s};
    } else {
        const double s = 2.0 * std::sqrt(1.0 + m22 - m00 - m11);
        q = {(m10 - m01) / s, (m02 + m20) / s, (m12 + m21) / s, 0.25 * s};
    }
    return q.normalized();
}

std::vector<Keyframe> read_track(const Reader& rd, const json& arr, const std::string& field,
                                 const char* position_key, bool camera) {
    if (!arr.is_array()) rd.fail(field, "expected an array of keyframes");
    std::vector<Keyframe> track;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string f = field + "[" + std::to_string(i) + "]";
        const json& k = arr[i];
        Keyframe kf;
        kf.t = rd.number(rd.member(k, "t", f), f + ".t");
        if (camera || k.contains(position_key)) {
            kf.position = rd.vec3(rd.member(k, position_key, f), f + "." + position_key);
        }
        if (k.contains("quat")) {
            kf.orientation = rd.quat(k["quat"], f + ".quat");
        } else if (camera && k.contains("look_at")) {
            const Vec3 up = k.contains("up") ? rd.vec3(k["up"], f + ".up") : Vec3{0.0, 1.0, 0.0};
            kf.orientation = look_rotation(kf.position, rd.vec3(k["look_at"], f + ".look_at"), up);
        } else if (camera) {
            rd.fail(f, "camera keyframe needs \"quat\" or \"look_at\"");
        }
        track.push_back(kf);
    }
    return track;
}

Material read_material(const Reader& rd, const json& m, const std::string& field) {
    const json& kind_v = rd.member(m, "kind", field);
    if (!kind_v.is_string()) rd.fail(field + ".kind", "expected a string");
    const std::string kind = kind_v.get<std::string>();
    if (kind == "lambertian") return Material::lambertian(rd.rgb(rd.member(m, "albedo", field), field + ".albedo"));
    if (kind == "mirror") {
        const double r = m.contains("reflectance") ? rd.number(m["reflectance"], field + ".reflectance") : 1.0;
        return Material::mirror(r);
    }
    if (kind == "emitter") return Material::emitter(rd.rgb(rd.member(m, "radiance", field), field + ".radiance"));
    rd.fail(field + ".kind", "unknown material kind \"" + kind + "\"");
}

void add_quad(std::vector<Primitive>& out, const std::array<Vec3, 4>& v, std::size_t material,
              const std::vector<Keyframe>& motion) {
    out.push_back({Triangle{{v[0], v[1], v[2]}}, material, motion});
    out.push_back({Triangle{{v[0], v[2], v[3]}}, material, motion});
}

void add_box(std::vector<Primitive>& out, const Vec3& lo, const Vec3& hi, std::size_t material,
             const std::vector<Keyframe>& motion) {
    const auto c = [&](int i) {
        return Vec3{(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z};
    };
    // Faces wound counter-clockwise seen from outside.
    add_quad(out, {c(0), c(4), c(6), c(2)}, material, motion);  // -x
    add_quad(out, {c(1), c(3), c(7), c(5)}, material, motion);  // +x
    add_quad(out, {c(0), c(1), c(5), c(4)}, material, motion);  // -y
    add_quad(out, {c(2), c(6), c(7), c(3)}, material, motion);  // +y
    add_quad(out, {c(0), c(2), c(3), c(1)}, material, motion);  // -z
    add_quad(out, {c(4), c(5), c(7), c(6)}, material, motion);  // +z
}

Scene read_scene(const json& doc, const std::string& source) {
    const Reader rd(source);
    if (!doc.is_object()) rd.fail("<root>", "expected an object");
    Scene scene;

    const json& cam = rd.member(doc, "camera", "<root>");
    scene.camera.fov = rd.number(rd.member(cam, "fov", "camera"), "camera.fov");
    scene.camera.width = rd.integer(rd.member(cam, "width", "camera"), "camera.width");
    scene.camera.height = rd.integer(rd.member(cam, "height", "camera"), "camera.height");
    scene.camera.keyframes = read_track(rd, rd.member(cam, "keyframes", "camera"), "camera.keyframes", "pos", true);
    scene.camera.frames = rd.integer(rd.member(doc, "frames", "<root>"), "frames");
    scene.threshold = rd.number(rd.member(doc, "threshold", "<root>"), "threshold");
    scene.environment = doc.contains("environment") ? rd.rgb(doc["environment"], "environment") : Rgb{};

    std::map<std::string, std::size_t> names;
    if (doc.contains("materials")) {
        const json& mats = doc["materials"];
        if (!mats.is_object()) rd.fail("materials", "expected an object keyed by name");
        for (const auto& [name, m] : mats.items()) {
            names[name] = scene.materials.size();
            scene.materials.push_back(read_material(rd, m, "materials." + name));
        }
    }

    const json& prims = rd.member(doc, "primitives", "<root>");
    if (!prims.is_array()) rd.fail("primitives", "expected an array");
    for (std::size_t i = 0; i < prims.size(); ++i) {
        const std::string f = "primitives[" + std::to_string(i) + "]";
        const json& p = prims[i];

        const json& mref = rd.member(p, "material", f);
        std::size_t material = 0;
        if (mref.is_string()) {
            const auto it = names.find(mref.get<std::string>());
            if (it == names.end()) rd.fail(f + ".material", "unknown material \"" + mref.get<std::string>() + "\"");
            material = it->second;
        } else {
            material = scene.materials.size();
            scene.materials.push_back(read_material(rd, mref, f + ".material"));
        }

        std::vector<Keyframe> motion;
        if (p.contains("motion")) motion = read_track(rd, p["motion"], f + ".motion", "translate", false);

        const json& type_v = rd.member(p, "type", f);
        if (!type_v.is_string()) rd.fail(f + ".type", "expected a string");
        const std::string type = type_v.get<std::string>();
        if (type == "sphere") {
            Sphere s{rd.vec3(rd.member(p, "center", f), f + ".center"),
                     rd.number(rd.member(p, "radius", f), f + ".radius")};
            scene.primitives.push_back({s, material, motion});
        } else if (type == "triangle" || type == "quad") {
            const json& vs = rd.member(p, "vertices", f);
            const std::size_t n = type == "triangle" ? 3 : 4;
            if (!vs.is_array() || vs.size() != n) rd.fail(f + ".vertices", "expected " + std::to_string(n) + " vertices");
            std::array<Vec3, 4> v{};
            for (std::size_t k = 0; k < n; ++k) v[k] = rd.vec3(vs[k], f + ".vertices[" + std::to_string(k) + "]");
            if (n == 3) {
                scene.primitives.push_back({Triangle{{v[0], v[1], v[2]}}, material, motion});
            } else {
                add_quad(scene.primitives, v, material, motion);
            }
        } else if (type == "box") {
            add_box(scene.primitives, rd.vec3(rd.member(p, "min", f), f + ".min"),
                    rd.vec3(rd.member(p, "max", f), f + ".max"), material, motion);
        } else {
            rd.fail(f + ".type", "unknown primitive type \"" + type + "\"");
        }
    }
    return scene;
}

}  // namespace

Scene parse_scene(std::string_view json_text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        const std::size_t end = std::min(e.byte, json_text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (json_text[i] == '\n') ++line;
        }
        throw ParseError(source + ":" + std::to_string(line) + ": " + e.what());
    }
    Scene scene = read_scene(doc, source);
    scene.validate();
    return scene;
}

Scene load_scene(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scene file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scene(buf.str(), path.string());
}

}  // namespace evrender
