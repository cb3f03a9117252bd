#pragma once

#include <filesystem>
#include <string>

#include "evrender/scene.hpp"

namespace evtest {

inline std::filesystem::path scene_path(const std::string& name) {
    return std::filesystem::path(EVRENDER_SCENE_DIR) / name;
}

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(EVRENDER_TEST_DATA_DIR) / name;
}

/// Camera at the origin looking down -z, a single static keyframe.
inline evrender::Camera make_camera(int width, int height, int frames, double fov = 0.8) {
    evrender::Camera cam;
    cam.keyframes = {{0.0, {0.0, 0.0, 0.0}, {}}};
    cam.fov = fov;
    cam.width = width;
    cam.height = height;
    cam.frames = frames;
    return cam;
}

/// Lambertian sphere of the given albedo in front of the camera under a
/// uniform environment of luma `env`.
inline evrender::Scene furnace_scene(double albedo, double env = 1.0) {
    evrender::Scene scene;
    scene.camera = make_camera(4, 4, 2, 0.3);
    scene.materials = {evrender::Material::lambertian({albedo, albedo, albedo})};
    scene.primitives.push_back({evrender::Sphere{{0.0, 0.0, -4.0}, 1.0}, 0, {}});
    scene.environment = {env, env, env};
    scene.validate();
    return scene;
}

/// A large emitter filling the whole view, no environment.
inline evrender::Scene emitter_view_scene(double radiance) {
    evrender::Scene scene;
    scene.camera = make_camera(3, 3, 2, 0.2);
    scene.materials = {evrender::Material::emitter({radiance, radiance, radiance})};
    scene.primitives.push_back({evrender::Sphere{{0.0, 0.0, -10.0}, 5.0}, 0, {}});
    scene.validate();
    return scene;
}

}  // namespace evtest
