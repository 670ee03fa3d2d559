#include "stereotune/ga.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace stereotune {

namespace {

/// (g[0]-1)*10^(n-1) + ... + (g[n-2]-1)*10 + g[n-1] over genes [first, first+n).
int positional(const Chromosome& c, int first, int n)
{
    int value = 0;
    for (int i = 0; i < n - 1; ++i)
        value = value * 10 + (c[first + i] - 1);
    return value * 10 + c[first + n - 1];
}

void write_row(std::string& out, const FitnessRecord& r)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f\n", r.generation, r.best, r.mean, r.std);
    out += buf;
}

FitnessRecord summarize(int generation, const std::vector<Chromosome>& pop,
                        const std::vector<double>& scores)
{
    FitnessRecord rec;
    rec.generation = generation;
    const auto best = std::max_element(scores.begin(), scores.end());
    rec.best = *best;
    rec.best_chromosome = pop[static_cast<std::size_t>(best - scores.begin())];

    double sum = 0.0;
    std::size_t n = 0;
    for (double s : scores)
        if (std::isfinite(s)) {
            sum += s;
            ++n;
        }
    if (n == 0) {
        rec.mean = rec.best;
        rec.std = 0.0;
        return rec;
    }
    rec.mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (double s : scores)
        if (std::isfinite(s))
            sq += (s - rec.mean) * (s - rec.mean);
    rec.std = std::sqrt(sq / static_cast<double>(n));
    return rec;
}

/// Larger score wins; ties go to the first draw.
std::size_t tournament(const std::vector<double>& scores, Rng& rng)
{
    const int last = static_cast<int>(scores.size()) - 1;
    const auto a = static_cast<std::size_t>(rng.uniform_int(0, last));
    const auto b = static_cast<std::size_t>(rng.uniform_int(0, last));
    return scores[b] > scores[a] ? b : a;
}

} // namespace

Chromosome::Chromosome(const Genes& genes) : genes_(genes)
{
    for (std::size_t i = 0; i < genes_.size(); ++i)
        if (genes_[i] < kGeneMin || genes_[i] > kGeneMax)
            throw std::invalid_argument("gene " + std::to_string(i + 1) + " = " +
                                        std::to_string(genes_[i]) + " outside [1, 10]");
}

Chromosome Chromosome::filled(int value)
{
    Genes g;
    g.fill(static_cast<std::uint8_t>(value));
    return Chromosome(g);
}

std::string Chromosome::to_string() const
{
    std::string s;
    for (std::size_t i = 0; i < genes_.size(); ++i) {
        if (i)
            s += ' ';
        s += std::to_string(genes_[i]);
    }
    return s;
}

ParameterSet decode(const Chromosome& c, int num_disparities)
{
    ParameterSet p;
    p.match.alpha = positional(c, 0, 5);
    p.match.beta = std::max(positional(c, 5, 5), p.match.alpha + 1);
    p.match.delta_lr = positional(c, 10, 2);
    p.match.eta = positional(c, 12, 2);
    p.match.gamma = positional(c, 14, 2);
    p.match.speckle_window = positional(c, 16, 3);
    p.match.speckle_range = positional(c, 19, 3);
    p.match.num_disparities = num_disparities;
    p.wls.lambda = positional(c, 22, 5);
    p.wls.sigma = (c[27] - 1) / 10.0;
    return p;
}

Chromosome random_chromosome(Rng& rng)
{
    Chromosome::Genes g;
    for (auto& gene : g)
        gene = static_cast<std::uint8_t>(rng.uniform_int(kGeneMin, kGeneMax));
    return Chromosome(g);
}

std::pair<Chromosome, Chromosome> crossover_segment(const Chromosome& a, const Chromosome& b,
                                                    int first, int last)
{
    if (first < 0 || last > kGeneCount || first > last)
        throw std::invalid_argument("crossover cut points must satisfy 0 <= first <= last <= 28");
    Chromosome::Genes ga = a.genes();
    Chromosome::Genes gb = b.genes();
    std::swap_ranges(ga.begin() + first, ga.begin() + last, gb.begin() + first);
    return {Chromosome(ga), Chromosome(gb)};
}

std::pair<Chromosome, Chromosome> two_point_crossover(const Chromosome& a, const Chromosome& b,
                                                      Rng& rng)
{
    int i = rng.uniform_int(0, kGeneCount);
    int j = rng.uniform_int(0, kGeneCount);
    if (i > j)
        std::swap(i, j);
    return crossover_segment(a, b, i, j);
}

Chromosome mutate(const Chromosome& c, double p, Rng& rng)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("mutation probability must lie in [0, 1]");
    Chromosome::Genes g = c.genes();
    for (auto& gene : g)
        if (rng.uniform01() < p)
            gene = static_cast<std::uint8_t>(rng.uniform_int(kGeneMin, kGeneMax));
    return Chromosome(g);
}

WlsResult compute_disparity(const GrayImage& left, const GrayImage& right,
                            const ParameterSet& params)
{
    return wls_refine(run_sgbm(left, right, params.match), left, params.wls);
}

double evaluate_fitness(const ParameterSet& params, const FitnessProblem& problem)
{
    try {
        const DisparityMap pred = compute_disparity(problem.left, problem.right, params).disparity;
        const double d_max = problem.num_disparities - 1;
        switch (problem.metric) {
        case Metric::Mse: return -mse(problem.ground_truth, pred);
        case Metric::Psnr: return psnr(problem.ground_truth, pred, d_max);
        case Metric::Ssim: return ssim(problem.ground_truth, pred, d_max);
        }
    } catch (const std::exception&) {
    }
    return -std::numeric_limits<double>::infinity();
}

double evaluate_fitness(const Chromosome& c, const FitnessProblem& problem)
{
    return evaluate_fitness(decode(c, problem.num_disparities), problem);
}

void GAConfig::validate() const
{
    if (population_size < 2)
        throw std::invalid_argument("population_size must be >= 2");
    if (generations < 0)
        throw std::invalid_argument("generations must be >= 0");
    if (elite_count < 0 || elite_count >= population_size)
        throw std::invalid_argument("elite_count must lie in [0, population_size)");
    if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0))
        throw std::invalid_argument("crossover_probability must lie in [0, 1]");
    if (!(mutation_probability >= 0.0 && mutation_probability <= 1.0))
        throw std::invalid_argument("mutation_probability must lie in [0, 1]");
}

GAResult run_ga(const GAConfig& cfg, const GrayImage& left, const GrayImage& right,
                const DisparityMap& ground_truth, int num_disparities, int workers)
{
    cfg.validate();
    require_same_shape(left, right, "run_ga");
    require_same_shape(left, ground_truth, "run_ga");
    const FitnessProblem problem{left, right, ground_truth, cfg.fitness_metric, num_disparities};
    const auto pop_size = static_cast<std::size_t>(cfg.population_size);
    workers = std::max(1, workers);

    Rng rng(cfg.rng_seed);
    std::map<Chromosome, double> cache;
    GAResult result;

    auto evaluate = [&](const std::vector<Chromosome>& pop) {
        std::vector<Chromosome> pending;
        for (const auto& c : pop)
            if (!cache.contains(c) &&
                std::find(pending.begin(), pending.end(), c) == pending.end())
                pending.push_back(c);

        std::vector<double> fresh(pending.size());
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (std::size_t i = next++; i < pending.size(); i = next++)
                fresh[i] = evaluate_fitness(pending[i], problem);
        };
        const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), pending.size());
        if (n_threads <= 1) {
            work();
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t t = 0; t < n_threads; ++t)
                pool.emplace_back(work);
        }
        for (std::size_t i = 0; i < pending.size(); ++i)
            cache.emplace(pending[i], fresh[i]);
        result.evaluations += pending.size();

        std::vector<double> scores;
        scores.reserve(pop.size());
        for (const auto& c : pop)
            scores.push_back(cache.at(c));
        return scores;
    };

    std::vector<Chromosome> pop;
    pop.reserve(pop_size);
    for (std::size_t i = 0; i < pop_size; ++i)
        pop.push_back(random_chromosome(rng));

    for (int gen = 0;; ++gen) {
        const std::vector<double> scores = evaluate(pop);
        result.history.push_back(summarize(gen, pop, scores));
        if (gen == cfg.generations)
            break;

        std::vector<std::size_t> order(pop_size);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

        std::vector<Chromosome> next;
        next.reserve(pop_size);
        for (int e = 0; e < cfg.elite_count; ++e)
            next.push_back(pop[order[static_cast<std::size_t>(e)]]);

        while (next.size() < pop_size) {
            const Chromosome& pa = pop[tournament(scores, rng)];
            const Chromosome& pb = pop[tournament(scores, rng)];
            std::pair<Chromosome, Chromosome> kids{pa, pb};
            if (rng.uniform01() < cfg.crossover_probability)
                kids = two_point_crossover(pa, pb, rng);
            const Chromosome c1 = mutate(kids.first, cfg.mutation_probability, rng);
            const Chromosome c2 = mutate(kids.second, cfg.mutation_probability, rng);
            next.push_back(c1);
            if (next.size() < pop_size)
                next.push_back(c2);
        }
        pop = std::move(next);
    }

    const FitnessRecord& last = result.history.back();
    result.best_chromosome = last.best_chromosome;
    result.best_fitness = last.best;
    result.best = decode(last.best_chromosome, num_disparities);
    return result;
}

std::string history_csv(const std::vector<FitnessRecord>& history)
{
    std::string out = "generation,best,mean,std\n";
    for (const auto& r : history)
        write_row(out, r);
    return out;
}

} // namespace stereotune
