#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include "commands.hpp"
#include "evrender/error.hpp"
#include "evrender/version.hpp"

namespace {

using evrender::cli::SimFlags;

void add_sim_flags(CLI::App& cmd, SimFlags& flags, std::string& mode, bool with_mode) {
    auto& c = flags.config;
    if (with_mode) {
        cmd.add_option("--mode", mode, "baseline, one_tailed, two_tailed or mean_only")->capture_default_str();
    }
    cmd.add_option("--spp", c.max_samples, "Sample budget per pixel and frame")->capture_default_str();
    cmd.add_option("--frames", flags.frames, "Frame count (default: scene file)");
    cmd.add_option("--width", flags.width, "Image width (default: scene file)");
    cmd.add_option("--height", flags.height, "Image height (default: scene file)");
    cmd.add_option("--alpha", c.alpha, "Significance level of the termination test")->capture_default_str();
    cmd.add_option("--theta", c.threshold, "Contrast threshold (default: scene file)");
    cmd.add_option("--epsilon", c.luminance_floor, "Luminance floor before the log")->capture_default_str();
    cmd.add_option("--init-batch", c.initial_batch, "Samples before the first test")->capture_default_str();
    cmd.add_option("--batch", c.batch, "Samples added per further test")->capture_default_str();
    cmd.add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd.add_option("--threads", c.threads, "Worker threads (0: EVRENDER_THREADS or all cores)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-camera simulator with adaptive path tracing"};
    app.set_version_flag("--version", std::string(evrender::kVersion));
    app.require_subcommand(1);

    evrender::cli::RenderOptions render;
    render.sim.config.threads = 0;
    std::string render_mode = "one_tailed";
    auto* render_cmd = app.add_subcommand("render", "Simulate an event stream for a scene");
    render_cmd->add_option("--scene", render.scene, "Scene JSON file");
    render_cmd->add_option("--manifest", render.manifest, "Re-run the configuration recorded in a manifest");
    render_cmd->add_option("--out", render.out, "Output directory")->capture_default_str();
    add_sim_flags(*render_cmd, render.sim, render_mode, true);

    evrender::cli::EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Compare an event stream against a reference");
    eval_cmd->add_option("reference", eval.reference, "Reference events.csv (usually baseline)")->required();
    eval_cmd->add_option("test", eval.test, "Events to evaluate")->required();
    eval_cmd->add_option("--width", eval.width, "Image width")->required();
    eval_cmd->add_option("--height", eval.height, "Image height")->required();
    eval_cmd->add_option("--frames", eval.frames, "Frame count")->required();
    eval_cmd->add_option("--tau", eval.tau, "F1 match radius in pixel/frame units")->capture_default_str();
    eval_cmd->add_option("--out", eval.out, "Report CSV path (a .txt table is written alongside)");

    evrender::cli::BenchOptions bench;
    bench.sim.config.threads = 0;
    std::string unused_mode;
    auto* bench_cmd = app.add_subcommand("bench", "Measure speedup over baseline at several resolutions");
    bench_cmd->add_option("--scene", bench.scene, "Scene JSON file")->required();
    bench_cmd->add_option("--resolutions", bench.resolutions, "Square image sizes")->delimiter(',')->required();
    bench_cmd->add_option("--modes", bench.modes, "Modes to time against baseline")
        ->delimiter(',')
        ->capture_default_str();
    bench_cmd->add_option("--out", bench.out, "Speedup CSV path")->capture_default_str();
    add_sim_flags(*bench_cmd, bench.sim, unused_mode, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*render_cmd) {
            render.sim.config.mode = evrender::parse_sim_mode(render_mode);
            return evrender::cli::cmd_render(render);
        }
        if (*eval_cmd) return evrender::cli::cmd_eval(eval);
        return evrender::cli::cmd_bench(bench);
    } catch (const evrender::UserError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::out_of_range& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 2;
    }
}
