#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <cstring>
#include <optional>

#include "stereotune/ga.hpp"
#include "stereotune/image.hpp"
#include "stereotune/metrics.hpp"
#include "stereotune/parameter_file.hpp"
#include "stereotune/sgbm.hpp"
#include "stereotune/synth.hpp"
#include "stereotune/wls.hpp"

namespace py = pybind11;
namespace st = stereotune;

namespace {

template <typename T>
using CArray = py::array_t<T, py::array::c_style | py::array::forcecast>;

template <typename Raster>
Raster to_raster(const CArray<typename Raster::value_type>& a, const char* what)
{
    if (a.ndim() != 2)
        throw st::DimensionError(std::string(what) + " must be a 2-D array");
    const auto h = static_cast<int>(a.shape(0));
    const auto w = static_cast<int>(a.shape(1));
    std::vector<typename Raster::value_type> data(a.data(), a.data() + a.size());
    return Raster(w, h, std::move(data));
}

template <typename Raster>
py::array_t<typename Raster::value_type> to_array(const Raster& r)
{
    py::array_t<typename Raster::value_type> out({r.height(), r.width()});
    std::memcpy(out.mutable_data(), r.pixels().data(), r.size() * sizeof(typename Raster::value_type));
    return out;
}

st::GrayImage gray(const CArray<std::uint8_t>& a, const char* what)
{
    return to_raster<st::GrayImage>(a, what);
}

st::DisparityMap disparity(const CArray<float>& a, const char* what)
{
    return to_raster<st::DisparityMap>(a, what);
}

st::Chromosome chromosome(const std::vector<int>& genes)
{
    if (genes.size() != st::kGeneCount)
        throw std::invalid_argument("a chromosome has exactly 28 genes");
    st::Chromosome::Genes g;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (genes[i] < st::kGeneMin || genes[i] > st::kGeneMax)
            throw std::invalid_argument("genes must lie in [1, 10]");
        g[i] = static_cast<std::uint8_t>(genes[i]);
    }
    return st::Chromosome(g);
}

std::vector<int> gene_list(const st::Chromosome& c)
{
    return {c.genes().begin(), c.genes().end()};
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "SGBM + WLS stereo matching with GA parameter tuning";

    py::register_exception<st::FormatError>(m, "FormatError", PyExc_ValueError);

    // ------------------------------------------------------------ parameters
    py::class_<st::MatchParams>(m, "MatchParams")
        .def(py::init<>())
        .def_readwrite("alpha", &st::MatchParams::alpha)
        .def_readwrite("beta", &st::MatchParams::beta)
        .def_readwrite("eta", &st::MatchParams::eta)
        .def_readwrite("gamma", &st::MatchParams::gamma)
        .def_readwrite("delta_lr", &st::MatchParams::delta_lr)
        .def_readwrite("speckle_window", &st::MatchParams::speckle_window)
        .def_readwrite("speckle_range", &st::MatchParams::speckle_range)
        .def_readwrite("num_disparities", &st::MatchParams::num_disparities)
        .def("validate", &st::MatchParams::validate)
        .def(py::self == py::self)
        .def("__repr__", [](const st::MatchParams& p) {
            return "MatchParams(alpha=" + std::to_string(p.alpha) + ", beta=" +
                   std::to_string(p.beta) + ", eta=" + std::to_string(p.eta) + ", gamma=" +
                   std::to_string(p.gamma) + ", delta_lr=" + std::to_string(p.delta_lr) +
                   ", speckle_window=" + std::to_string(p.speckle_window) +
                   ", speckle_range=" + std::to_string(p.speckle_range) +
                   ", num_disparities=" + std::to_string(p.num_disparities) + ")";
        });

    py::class_<st::WlsParams>(m, "WlsParams")
        .def(py::init<>())
        .def_readwrite("lambda_", &st::WlsParams::lambda)
        .def_readwrite("sigma", &st::WlsParams::sigma)
        .def_readwrite("max_iterations", &st::WlsParams::max_iterations)
        .def_readwrite("tolerance", &st::WlsParams::tolerance)
        .def("validate", &st::WlsParams::validate)
        .def(py::self == py::self);

    py::class_<st::ParameterSet>(m, "ParameterSet")
        .def(py::init<>())
        .def_readwrite("match", &st::ParameterSet::match)
        .def_readwrite("wls", &st::ParameterSet::wls)
        .def(py::self == py::self)
        .def("to_json", [](const st::ParameterSet& p) { return st::format_parameters(p); })
        .def_static("from_json", [](const std::string& text) {
            return st::parse_parameters(text).params;
        });

    // ------------------------------------------------------------ image I/O
    m.def("load_pgm", [](const std::filesystem::path& p) { return to_array(st::load_pgm(p)); });
    m.def("save_pgm", [](const CArray<std::uint8_t>& a, const std::filesystem::path& p) {
        st::save_pgm(gray(a, "image"), p);
    });
    m.def("load_pfm", [](const std::filesystem::path& p) { return to_array(st::load_pfm(p)); });
    m.def("save_pfm", [](const CArray<float>& a, const std::filesystem::path& p) {
        st::save_pfm(disparity(a, "disparity map"), p);
    });
    m.def("sobel_magnitude", [](const CArray<std::uint8_t>& a) {
        const st::GradientImage g = st::sobel_magnitude(gray(a, "image"));
        py::array_t<std::uint8_t> out({g.height(), g.width()});
        std::copy(g.pixels().begin(), g.pixels().end(), out.mutable_data());
        return out;
    });
    m.attr("INVALID_DISPARITY") = st::kInvalidDisparity;

    // ------------------------------------------------------------ matching
    m.def(
        "run_sgbm",
        [](const CArray<std::uint8_t>& left, const CArray<std::uint8_t>& right,
           const st::MatchParams& params) {
            const st::GrayImage l = gray(left, "left"), r = gray(right, "right");
            st::DisparityMap out(1, 1);
            {
                py::gil_scoped_release release;
                out = st::run_sgbm(l, r, params);
            }
            return to_array(out);
        },
        py::arg("left"), py::arg("right"), py::arg("params") = st::MatchParams{});

    m.def(
        "wls_refine",
        [](const CArray<float>& disp, const CArray<std::uint8_t>& guide, const st::WlsParams& params) {
            const st::DisparityMap d = disparity(disp, "disparity");
            const st::GrayImage g = gray(guide, "guide");
            st::WlsResult r{st::DisparityMap(1, 1), false, 0, 0.0};
            {
                py::gil_scoped_release release;
                r = st::wls_refine(d, g, params);
            }
            py::dict out;
            out["disparity"] = to_array(r.disparity);
            out["converged"] = r.converged;
            out["iterations"] = r.iterations;
            out["relative_residual"] = r.relative_residual;
            return out;
        },
        py::arg("disparity"), py::arg("guide"), py::arg("params") = st::WlsParams{});

    // ------------------------------------------------------------ metrics
    m.def(
        "mse", [](const CArray<float>& gt, const CArray<float>& pred) {
            return st::mse(disparity(gt, "gt"), disparity(pred, "pred"));
        },
        py::arg("gt"), py::arg("pred"));
    m.def(
        "psnr", [](const CArray<float>& gt, const CArray<float>& pred, double d_max) {
            return st::psnr(disparity(gt, "gt"), disparity(pred, "pred"), d_max);
        },
        py::arg("gt"), py::arg("pred"), py::arg("d_max") = 63.0);
    m.def(
        "ssim", [](const CArray<float>& gt, const CArray<float>& pred, double d_max) {
            return st::ssim(disparity(gt, "gt"), disparity(pred, "pred"), d_max);
        },
        py::arg("gt"), py::arg("pred"), py::arg("d_max") = 63.0);

    // ------------------------------------------------------------ synthesis
    m.def(
        "generate",
        [](int width, int height, int true_disparity, const std::string& pattern,
           std::uint64_t noise_seed) {
            const st::StereoPair s = st::generate(
                {width, height, true_disparity, st::parse_pattern(pattern), noise_seed});
            return py::make_tuple(to_array(s.left), to_array(s.right), to_array(s.ground_truth));
        },
        py::arg("width") = 128, py::arg("height") = 96, py::arg("true_disparity") = 8,
        py::arg("pattern") = "uniform-noise", py::arg("noise_seed") = 1);

    // ------------------------------------------------------------ GA
    m.def(
        "decode",
        [](const std::vector<int>& genes, int num_disparities) {
            return st::decode(chromosome(genes), num_disparities);
        },
        py::arg("genes"), py::arg("num_disparities") = 64);

    m.def(
        "evaluate_fitness",
        [](const std::vector<int>& genes, const CArray<std::uint8_t>& left,
           const CArray<std::uint8_t>& right, const CArray<float>& gt, const std::string& metric,
           int num_disparities) {
            const st::GrayImage l = gray(left, "left"), r = gray(right, "right");
            const st::DisparityMap g = disparity(gt, "gt");
            const st::Chromosome c = chromosome(genes);
            py::gil_scoped_release release;
            return st::evaluate_fitness(c, {l, r, g, st::parse_metric(metric), num_disparities});
        },
        py::arg("genes"), py::arg("left"), py::arg("right"), py::arg("gt"),
        py::arg("metric") = "ssim", py::arg("num_disparities") = 64);

    m.def(
        "run_ga",
        [](const CArray<std::uint8_t>& left, const CArray<std::uint8_t>& right,
           const CArray<float>& gt, int num_disparities, int population_size, int generations,
           double crossover_probability, double mutation_probability, int elite_count,
           std::uint64_t seed, const std::string& metric, int workers) {
            const st::GrayImage l = gray(left, "left"), r = gray(right, "right");
            const st::DisparityMap g = disparity(gt, "gt");
            st::GAConfig cfg;
            cfg.population_size = population_size;
            cfg.generations = generations;
            cfg.crossover_probability = crossover_probability;
            cfg.mutation_probability = mutation_probability;
            cfg.elite_count = elite_count;
            cfg.rng_seed = seed;
            cfg.fitness_metric = st::parse_metric(metric);
            std::optional<st::GAResult> res;
            {
                py::gil_scoped_release release;
                res = st::run_ga(cfg, l, r, g, num_disparities, workers);
            }
            py::list history;
            for (const auto& rec : res->history) {
                py::dict row;
                row["generation"] = rec.generation;
                row["best"] = rec.best;
                row["mean"] = rec.mean;
                row["std"] = rec.std;
                history.append(row);
            }
            py::dict out;
            out["best"] = res->best;
            out["best_chromosome"] = gene_list(res->best_chromosome);
            out["best_fitness"] = res->best_fitness;
            out["history"] = history;
            out["history_csv"] = st::history_csv(res->history);
            out["evaluations"] = res->evaluations;
            return out;
        },
        py::arg("left"), py::arg("right"), py::arg("gt"), py::arg("num_disparities") = 64,
        py::arg("population_size") = 30, py::arg("generations") = 100,
        py::arg("crossover_probability") = 0.6, py::arg("mutation_probability") = 0.3,
        py::arg("elite_count") = 5, py::arg("seed") = 0, py::arg("metric") = "ssim",
        py::arg("workers") = 1);
}
