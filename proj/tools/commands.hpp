#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evrender/eventsim.hpp"

namespace evrender::cli {

/// Simulation flags shared by `render` and `bench`. Unset optionals fall
/// back to the scene file.
struct SimFlags {
    SimConfig config;
    std::optional<int> frames;
    std::optional<int> width;
    std::optional<int> height;
};

struct RenderOptions {
    std::filesystem::path scene;
    std::filesystem::path manifest;  // re-run from a previous manifest when set
    SimFlags sim;
    std::filesystem::path out = "out";
};

struct EvalOptions {
    std::filesystem::path reference;
    std::filesystem::path test;
    int width = 0;
    int height = 0;
    int frames = 0;
    double tau = 2.0;
    std::filesystem::path out;  // report CSV; the .txt table is written next to it
};

struct BenchOptions {
    std::filesystem::path scene;
    std::vector<int> resolutions;
    std::vector<std::string> modes{"baseline", "one_tailed"};
    SimFlags sim;
    std::filesystem::path out = "bench.csv";
};

int cmd_render(const RenderOptions& options);
int cmd_eval(const EvalOptions& options);
int cmd_bench(const BenchOptions& options);

/// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::filesystem::path& path);

}  // namespace evrender::cli
