#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "evrender/error.hpp"
#include "evrender/eventsim.hpp"
#include "evrender/evio.hpp"
#include "evrender/logstat.hpp"
#include "evrender/metrics.hpp"
#include "evrender/tracer.hpp"
#include "evrender/version.hpp"

namespace py = pybind11;
using namespace evrender;

namespace {

// Event streams cross the boundary as (n, 4) int32 arrays with columns
// s, x, y, p.
using EventArray = py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>;

EventArray to_array(const EventStream& events) {
    EventArray out({static_cast<py::ssize_t>(events.size()), py::ssize_t{4}});
    auto v = out.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < static_cast<py::ssize_t>(events.size()); ++i) {
        const Event& e = events[static_cast<std::size_t>(i)];
        v(i, 0) = e.frame;
        v(i, 1) = e.x;
        v(i, 2) = e.y;
        v(i, 3) = e.polarity;
    }
    return out;
}

EventStream from_array(const EventArray& a) {
    if (a.ndim() != 2 || (a.shape(1) != 4 && a.shape(0) > 0)) {
        throw std::invalid_argument("events must be an (n, 4) array of s, x, y, p");
    }
    EventStream events;
    if (a.shape(0) == 0) return events;
    auto v = a.unchecked<2>();
    events.reserve(static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.shape(0); ++i) events.push_back({v(i, 1), v(i, 2), v(i, 0), v(i, 3)});
    return events;
}

template <typename T>
py::array_t<T> image(const std::vector<T>& values, int width, int height) {
    py::array_t<T> out({height, width});
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

py::dict frame_dict(const FrameReport& f) {
    py::dict d;
    d["frame"] = f.frame;
    d["samples"] = image(f.samples, f.width, f.height);
    d["mean"] = image(f.mean, f.width, f.height);
    d["variance"] = image(f.variance, f.width, f.height);
    d["events"] = to_array(f.events);
    d["seconds"] = f.seconds;
    d["paths"] = f.paths;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Event-camera simulation by adaptive Monte Carlo path tracing.";
    m.attr("__version__") = std::string(kVersion);

    py::register_exception<UserError>(m, "UserError", PyExc_ValueError);

    py::enum_<SimMode>(m, "SimMode")
        .value("baseline", SimMode::baseline)
        .value("one_tailed", SimMode::one_tailed)
        .value("two_tailed", SimMode::two_tailed)
        .value("mean_only", SimMode::mean_only);

    py::class_<Scene>(m, "Scene")
        .def_property(
            "width", [](const Scene& s) { return s.camera.width; }, [](Scene& s, int v) { s.camera.width = v; })
        .def_property(
            "height", [](const Scene& s) { return s.camera.height; }, [](Scene& s, int v) { s.camera.height = v; })
        .def_property(
            "frames", [](const Scene& s) { return s.camera.frames; }, [](Scene& s, int v) { s.camera.frames = v; })
        .def_readwrite("threshold", &Scene::threshold)
        .def_property_readonly("primitive_count", [](const Scene& s) { return s.primitives.size(); })
        .def("validate", &Scene::validate);

    m.def("load_scene", &load_scene, py::arg("path"));
    m.def("parse_scene", &parse_scene, py::arg("text"), py::arg("source") = "<string>");

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("mode", &SimConfig::mode)
        .def_readwrite("max_samples", &SimConfig::max_samples)
        .def_readwrite("initial_batch", &SimConfig::initial_batch)
        .def_readwrite("batch", &SimConfig::batch)
        .def_readwrite("alpha", &SimConfig::alpha)
        .def_readwrite("threshold", &SimConfig::threshold)
        .def_readwrite("luminance_floor", &SimConfig::luminance_floor)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("threads", &SimConfig::threads)
        .def("validate", &SimConfig::validate);

    m.def(
        "simulate",
        [](const Scene& scene, const SimConfig& config) {
            SimResult r;
            {
                py::gil_scoped_release release;
                r = simulate(scene, config);
            }
            py::dict out;
            out["events"] = to_array(r.events);
            py::list frames;
            for (const FrameReport& f : r.frames) frames.append(frame_dict(f));
            out["frames"] = frames;
            out["total_paths"] = r.total_paths;
            out["nonfinite_samples"] = r.nonfinite_samples;
            out["seconds"] = r.seconds;
            return out;
        },
        py::arg("scene"), py::arg("config"),
        "Runs the event simulation; returns events as an (n, 4) array of s, x, y, p plus per-frame maps.");

    m.def(
        "trace_paths",
        [](const Scene& scene, int x, int y, int frame, int n, std::uint64_t start_index, std::uint64_t seed) {
            std::vector<PathSample> samples;
            {
                py::gil_scoped_release release;
                samples = trace_paths(scene, {x, y}, frame, n, start_index, seed);
            }
            py::array_t<double> out(static_cast<py::ssize_t>(samples.size()));
            auto v = out.mutable_unchecked<1>();
            for (py::ssize_t i = 0; i < out.shape(0); ++i) v(i) = samples[static_cast<std::size_t>(i)].luminance;
            return out;
        },
        py::arg("scene"), py::arg("x"), py::arg("y"), py::arg("frame"), py::arg("n"), py::arg("start_index") = 0,
        py::arg("seed") = 0, "Per-path luminance samples for one pixel of one frame.");

    m.def(
        "log_samples",
        [](const std::vector<double>& luminance, double floor) {
            std::vector<PathSample> s;
            s.reserve(luminance.size());
            for (double l : luminance) s.push_back({l});
            return log_samples(s, floor);
        },
        py::arg("luminance"), py::arg("floor") = kDefaultLuminanceFloor);

    py::class_<LogLumStats>(m, "LogLumStats")
        .def(py::init<>())
        .def_static("from_moments", &LogLumStats::from_moments, py::arg("count"), py::arg("mean"), py::arg("variance"))
        .def("add", &LogLumStats::add)
        .def("merge", &LogLumStats::merge)
        .def_property_readonly("count", &LogLumStats::count)
        .def_property_readonly("mean", &LogLumStats::mean)
        .def_property_readonly("variance", &LogLumStats::variance);

    m.def(
        "accumulate",
        [](LogLumStats stats, const std::vector<double>& values) { return accumulate(stats, values); },
        py::arg("stats"), py::arg("values"));
    m.def("t_statistic", &t_statistic, py::arg("a"), py::arg("b"), py::arg("threshold"));
    m.def("student_t_cdf", &student_t_cdf, py::arg("t"), py::arg("dof"));
    m.def(
        "one_tailed_test",
        [](const LogLumStats& a, const LogLumStats& b, double threshold, double alpha) {
            const TestOutcome o = one_tailed_test(a, b, threshold, alpha);
            py::dict d;
            d["t"] = o.t;
            d["p"] = o.p;
            d["dof"] = o.dof;
            d["terminate"] = o.decision == Decision::terminate;
            return d;
        },
        py::arg("a"), py::arg("b"), py::arg("threshold"), py::arg("alpha") = 0.05);
    m.def(
        "termination_rule",
        [](SimMode mode, const LogLumStats& a, const LogLumStats& b, double threshold, double alpha) {
            return termination_rule(mode, a, b, threshold, alpha) == SamplingAction::stop;
        },
        py::arg("mode"), py::arg("a"), py::arg("b"), py::arg("threshold"), py::arg("alpha") = 0.05,
        "True when sampling should stop.");

    m.def(
        "rmse_psnr",
        [](const EventArray& a, const EventArray& b, int width, int height, int frames) {
            const auto fa = events_to_frames(from_array(a), width, height, frames);
            const auto fb = events_to_frames(from_array(b), width, height, frames);
            const FrameErrors e = rmse_psnr(fa, fb);
            return py::make_tuple(e.rmse, e.psnr);
        },
        py::arg("a"), py::arg("b"), py::arg("width"), py::arg("height"), py::arg("frames"));
    m.def(
        "polarity_f1",
        [](const EventArray& a, const EventArray& b, int width, int height, int frames, double tau) {
            return polarity_f1(to_point_cloud(from_array(a), width, height, frames),
                               to_point_cloud(from_array(b), width, height, frames), tau);
        },
        py::arg("a"), py::arg("b"), py::arg("width"), py::arg("height"), py::arg("frames"),
        py::arg("tau") = kDefaultMatchRadius);
    m.def(
        "signed_chamfer",
        [](const EventArray& a, const EventArray& b, int width, int height, int frames) {
            return signed_chamfer(to_point_cloud(from_array(a), width, height, frames),
                                  to_point_cloud(from_array(b), width, height, frames));
        },
        py::arg("a"), py::arg("b"), py::arg("width"), py::arg("height"), py::arg("frames"));

    m.def(
        "write_events", [](const std::filesystem::path& path, const EventArray& a) { write_events(path, from_array(a)); },
        py::arg("path"), py::arg("events"));
    m.def(
        "read_events", [](const std::filesystem::path& path) { return to_array(read_events(path)); },
        py::arg("path"));
    m.def(
        "write_pfm",
        [](const std::filesystem::path& path, py::array_t<float, py::array::c_style | py::array::forcecast> img) {
            if (img.ndim() != 2) throw std::invalid_argument("write_pfm expects a 2-D array");
            const std::span<const float> px(img.data(), static_cast<std::size_t>(img.size()));
            write_pfm(path, px, static_cast<int>(img.shape(1)), static_cast<int>(img.shape(0)));
        },
        py::arg("path"), py::arg("image"));
    m.def(
        "read_pfm",
        [](const std::filesystem::path& path) {
            const FloatImage img = read_pfm(path);
            return image(img.pixels, img.width, img.height);
        },
        py::arg("path"));
}
