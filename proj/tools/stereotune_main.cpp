// stereotune: disparity computation, GA parameter optimization, map
// evaluation and synthetic fixture generation.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error,
// 3 WLS non-convergence with --strict.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "stereotune/ga.hpp"
#include "stereotune/image.hpp"
#include "stereotune/metrics.hpp"
#include "stereotune/parameter_file.hpp"
#include "stereotune/synth.hpp"

namespace st = stereotune;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNotConverged = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GlobalOptions {
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool strict = false;
};

std::string fixed6(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

double valid_percent(const st::DisparityMap& m)
{
    std::size_t valid = 0;
    for (float v : m.pixels())
        valid += st::is_valid(v) ? 1 : 0;
    return 100.0 * static_cast<double>(valid) / static_cast<double>(m.size());
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
}

st::ParameterSet read_params(const std::string& path)
{
    auto loaded = st::load_parameters(path);
    for (const auto& w : loaded.warnings)
        std::cerr << "warning: " << path << ": " << w << "\n";
    return loaded.params;
}

// ---------------------------------------------------------------- disparity

struct DisparityArgs {
    std::string left, right, params, out;
    std::optional<int> num_disparities;
};

int cmd_disparity(const DisparityArgs& a, const GlobalOptions& g)
{
    const auto t0 = std::chrono::steady_clock::now();
    const st::GrayImage left = st::load_pgm(a.left);
    const st::GrayImage right = st::load_pgm(a.right);
    st::ParameterSet params = a.params.empty() ? st::ParameterSet{} : read_params(a.params);
    if (a.num_disparities)
        params.match.num_disparities = *a.num_disparities;
    if (!left.same_shape(right))
        throw st::FormatError("'" + a.left + "' and '" + a.right + "' differ in size");

    const st::WlsResult result = st::compute_disparity(left, right, params);
    st::save_pfm(result.disparity, a.out);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::cout << "size: " << left.width() << "x" << left.height() << "\n"
              << "valid: " << fixed6(valid_percent(result.disparity)) << "%\n"
              << "time: " << fixed6(secs) << " s\n";
    if (!result.converged) {
        std::cerr << "warning: WLS did not converge in " << result.iterations
                  << " iterations (relative residual " << result.relative_residual << ")\n";
        if (g.strict)
            return kNotConverged;
    }
    return kOk;
}

// ---------------------------------------------------------------- optimize

struct OptimizeArgs {
    std::string left, right, gt, metric = "ssim", log, out, baseline_params;
    int gens = 100;
    int pop = 30;
    std::uint64_t seed = 0;
    int num_disparities = 64;
};

/// Raw metric value; fitness stores MSE negated.
double raw_metric(st::Metric m, double fitness) { return m == st::Metric::Mse ? -fitness : fitness; }

double percent_change(st::Metric m, double baseline, double best)
{
    if (baseline == 0.0 || !std::isfinite(baseline) || !std::isfinite(best))
        return std::nan("");
    return m == st::Metric::Mse ? 100.0 * (baseline - best) / baseline
                                : 100.0 * (best - baseline) / baseline;
}

int cmd_optimize(const OptimizeArgs& a, const GlobalOptions& g)
{
    const st::Metric metric = st::parse_metric(a.metric);
    const st::GrayImage left = st::load_pgm(a.left);
    const st::GrayImage right = st::load_pgm(a.right);
    const st::DisparityMap gt = st::load_pfm(a.gt);
    if (!left.same_shape(right) || !left.same_shape(gt))
        throw st::FormatError("'" + a.left + "', '" + a.right + "' and '" + a.gt +
                              "' must share dimensions");

    st::ParameterSet baseline = a.baseline_params.empty()
                                    ? st::decode(st::Chromosome::filled(5), a.num_disparities)
                                    : read_params(a.baseline_params);
    baseline.match.num_disparities = a.num_disparities;

    st::GAConfig cfg;
    cfg.population_size = a.pop;
    cfg.generations = a.gens;
    cfg.rng_seed = a.seed;
    cfg.fitness_metric = metric;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    const st::GAResult result = st::run_ga(cfg, left, right, gt, a.num_disparities, g.workers);
    save_parameters(result.best, a.out);
    write_text(a.log, st::history_csv(result.history));

    const st::FitnessProblem problem{left, right, gt, metric, a.num_disparities};
    const double base = raw_metric(metric, st::evaluate_fitness(baseline, problem));
    const double best = raw_metric(metric, result.best_fitness);
    const auto name = std::string(st::metric_name(metric));
    std::cout << "metric: " << name << "\n"
              << "baseline: " << fixed6(base) << "\n"
              << "best: " << fixed6(best) << "\n"
              << "change: " << fixed6(percent_change(metric, base, best)) << "%\n"
              << "generations: " << a.gens << "\n"
              << "evaluations: " << result.evaluations << "\n";

    const st::WlsResult final_map = st::compute_disparity(left, right, result.best);
    if (!final_map.converged) {
        std::cerr << "warning: WLS did not converge for the best parameters\n";
        if (g.strict)
            return kNotConverged;
    }
    return kOk;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
    std::string pred, gt;
    double d_max = 63;
};

int cmd_eval(const EvalArgs& a)
{
    if (!(a.d_max > 0))
        throw UsageError("--d-max must be positive");
    const st::DisparityMap pred = st::load_pfm(a.pred);
    const st::DisparityMap gt = st::load_pfm(a.gt);
    if (!pred.same_shape(gt))
        throw st::FormatError("'" + a.pred + "' and '" + a.gt + "' differ in size");
    const st::MetricReport r = st::evaluate(gt, pred, a.d_max);
    std::cout << fixed6(r.mse) << "," << fixed6(r.psnr) << "," << fixed6(r.ssim) << "\n";
    return kOk;
}

// ------------------------------------------------------------------- synth

struct SynthArgs {
    st::SynthSpec spec;
    std::string pattern = "uniform-noise";
    std::string out_left, out_right, out_gt;
};

int cmd_synth(SynthArgs a)
{
    try {
        a.spec.pattern = st::parse_pattern(a.pattern);
        a.spec.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const st::StereoPair pair = st::generate(a.spec);
    st::save_pgm(pair.left, a.out_left);
    st::save_pgm(pair.right, a.out_right);
    st::save_pfm(pair.ground_truth, a.out_gt);
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Stereo disparity with GA-tuned SGBM + WLS"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions global;
    app.add_option("--workers", global.workers, "Fitness evaluation threads")
        ->check(CLI::PositiveNumber);
    app.add_flag("--strict", global.strict, "Exit 3 when WLS does not converge");

    DisparityArgs dis;
    auto* disparity = app.add_subcommand("disparity", "Compute a disparity map (PFM)");
    disparity->add_option("--left", dis.left, "Left PGM")->required();
    disparity->add_option("--right", dis.right, "Right PGM")->required();
    disparity->add_option("--params", dis.params, "Parameter file (JSON)");
    disparity->add_option("--num-disparities", dis.num_disparities, "Override disparity range");
    disparity->add_option("--out", dis.out, "Output PFM")->required();

    OptimizeArgs opt;
    auto* optimize = app.add_subcommand("optimize", "Tune parameters with the genetic algorithm");
    optimize->add_option("--left", opt.left, "Left PGM")->required();
    optimize->add_option("--right", opt.right, "Right PGM")->required();
    optimize->add_option("--gt", opt.gt, "Ground-truth PFM")->required();
    optimize->add_option("--metric", opt.metric, "mse, psnr or ssim")
        ->check(CLI::IsMember({"mse", "psnr", "ssim"}));
    optimize->add_option("--gens", opt.gens, "Generations")->check(CLI::NonNegativeNumber);
    optimize->add_option("--pop", opt.pop, "Population size");
    optimize->add_option("--seed", opt.seed, "RNG seed");
    optimize->add_option("--num-disparities", opt.num_disparities, "Disparity range")
        ->check(CLI::Range(2, 1024));
    optimize->add_option("--baseline-params", opt.baseline_params, "Baseline parameter file");
    optimize->add_option("--log", opt.log, "Convergence CSV")->required();
    optimize->add_option("--out", opt.out, "Best parameter file")->required();

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Print mse,psnr,ssim of a map against ground truth");
    eval->add_option("--pred", ev.pred, "Predicted PFM")->required();
    eval->add_option("--gt", ev.gt, "Ground-truth PFM")->required();
    eval->add_option("--d-max", ev.d_max, "Maximum disparity value");

    SynthArgs syn;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic stereo pair");
    synth->add_option("--width", syn.spec.width, "Width")->check(CLI::PositiveNumber);
    synth->add_option("--height", syn.spec.height, "Height")->check(CLI::PositiveNumber);
    synth->add_option("--disparity", syn.spec.true_disparity, "True disparity")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--pattern", syn.pattern, "uniform-noise, bands or checker");
    synth->add_option("--noise-seed", syn.spec.noise_seed, "Pattern seed");
    synth->add_option("--out-left", syn.out_left, "Left PGM")->required();
    synth->add_option("--out-right", syn.out_right, "Right PGM")->required();
    synth->add_option("--out-gt", syn.out_gt, "Ground-truth PFM")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*disparity)
            return cmd_disparity(dis, global);
        if (*optimize)
            return cmd_optimize(opt, global);
        if (*eval)
            return cmd_eval(ev);
        if (*synth)
            return cmd_synth(syn);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
    return kUsage;
}
