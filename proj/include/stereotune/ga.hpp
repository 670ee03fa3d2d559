#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stereotune/image.hpp"
#include "stereotune/metrics.hpp"
#include "stereotune/rng.hpp"
#include "stereotune/sgbm.hpp"
#include "stereotune/wls.hpp"

namespace stereotune {

inline constexpr int kGeneCount = 28;
inline constexpr int kGeneMin = 1;
inline constexpr int kGeneMax = 10;

/// Integer genotype: 28 genes in [1, 10].
///
/// Gene layout (1-based, as digits of a positional number whose digit value
/// is gene - 1, except the last digit which is taken as-is):
///   alpha  1-5     beta   6-10    delta_lr 11-12   eta 13-14   gamma 15-16
///   W      17-19   delta  20-22   lambda   23-27   sigma 28 ((g - 1) / 10)
class Chromosome {
public:
    using Genes = std::array<std::uint8_t, kGeneCount>;

    Chromosome() { genes_.fill(kGeneMin); }
    /// Throws std::invalid_argument if any gene is outside [1, 10].
    explicit Chromosome(const Genes& genes);
    static Chromosome filled(int value);

    int operator[](std::size_t i) const noexcept { return genes_[i]; }
    const Genes& genes() const noexcept { return genes_; }

    friend auto operator<=>(const Chromosome&, const Chromosome&) = default;

    std::string to_string() const;

private:
    Genes genes_;
};

struct ParameterSet {
    MatchParams match;
    WlsParams wls;

    friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

/// Total: every chromosome decodes, with beta repaired to max(beta, alpha + 1).
ParameterSet decode(const Chromosome& c, int num_disparities = 64);

Chromosome random_chromosome(Rng& rng);

/// Children exchange the genes in [first, last); 0 <= first <= last <= 28.
std::pair<Chromosome, Chromosome> crossover_segment(const Chromosome& a, const Chromosome& b,
                                                    int first, int last);

/// Draws two cut points uniformly on [0, 28] (ordered so first <= last) and
/// swaps the segment between them.
std::pair<Chromosome, Chromosome> two_point_crossover(const Chromosome& a, const Chromosome& b,
                                                      Rng& rng);

/// Each gene is independently redrawn from [1, 10] with probability p.
Chromosome mutate(const Chromosome& c, double p, Rng& rng);

struct FitnessProblem {
    const GrayImage& left;
    const GrayImage& right;
    const DisparityMap& ground_truth;
    Metric metric = Metric::Ssim;
    int num_disparities = 64;
};

/// Higher is better: -MSE, PSNR or SSIM of the SGBM + WLS output against
/// ground truth, with d_max = num_disparities - 1. Pipeline failures score
/// -infinity.
double evaluate_fitness(const ParameterSet& params, const FitnessProblem& problem);
double evaluate_fitness(const Chromosome& c, const FitnessProblem& problem);

/// Full disparity pipeline for a parameter set: SGBM followed by WLS.
WlsResult compute_disparity(const GrayImage& left, const GrayImage& right,
                            const ParameterSet& params);

struct GAConfig {
    int population_size = 30;
    int generations = 100;
    double crossover_probability = 0.6;
    double mutation_probability = 0.3;
    int elite_count = 5;
    std::uint64_t rng_seed = 0;
    Metric fitness_metric = Metric::Ssim;

    void validate() const;
};

struct FitnessRecord {
    int generation = 0;
    double best = 0.0;
    double mean = 0.0; // over finite scores
    double std = 0.0;  // population standard deviation over finite scores
    Chromosome best_chromosome;
};

struct GAResult {
    ParameterSet best;
    Chromosome best_chromosome;
    double best_fitness = 0.0;
    std::vector<FitnessRecord> history; // generations + 1 rows
    std::size_t evaluations = 0;        // distinct pipeline runs
};

/// Generational elitist GA. All random draws happen on the calling thread in
/// this order: initial population (28 gene draws per individual), then per
/// offspring pair: two tournament draws for each parent, one crossover draw,
/// two cut-point draws if crossing, then 28 mutation draws (plus one
/// replacement draw per mutated gene) for each child. Fitness evaluations run
/// on `workers` threads and are memoized per chromosome, so the result is
/// identical for any worker count.
GAResult run_ga(const GAConfig& cfg, const GrayImage& left, const GrayImage& right,
                const DisparityMap& ground_truth, int num_disparities, int workers = 1);

/// `generation,best,mean,std` header plus one row per record, 6 decimals.
std::string history_csv(const std::vector<FitnessRecord>& history);

} // namespace stereotune
