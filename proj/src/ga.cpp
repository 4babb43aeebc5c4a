#include "eqrestore/ga.hpp"

#include "eqrestore/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace eqr {

void GAConfig::check() const
{
    if (population_size < 2)
        throw std::invalid_argument("population_size must be at least 2");
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0))
        throw std::invalid_argument("mutation_rate must lie in [0, 1]");
    if (tournament_size < 2 || tournament_size > population_size)
        throw std::invalid_argument("tournament_size must lie in [2, population_size]");
    if (generations < 1)
        throw std::invalid_argument("generations must be at least 1");
    if (!(penalty_multiplier >= 0.0))
        throw std::invalid_argument("penalty_multiplier must be non-negative");
    if (time_limit_s && !(*time_limit_s > 0.0))
        throw std::invalid_argument("time_limit_s must be positive");
}

double ga_fitness(const Problem& problem, std::span<const double> recovery, double penalty_multiplier,
                  EnergyMode mode)
{
    if (recovery.size() != problem.dimension())
        throw std::invalid_argument("plan has " + std::to_string(recovery.size()) + " entries, scenario has " +
                                    std::to_string(problem.dimension()) + " damaged links");
    double D = 0.0;
    double E = 0.0;
    if (mode == EnergyMode::Full) {
        D = problem.full_deficiency(recovery);
        E = problem.equity(recovery);
    } else {
        const ObjectiveBreakdown b = problem.surrogate_energy(recovery);
        D = b.D;
        E = b.E;
    }
    const double cost = std::accumulate(recovery.begin(), recovery.end(), 0.0);
    const double rho = cost > problem.budget() ? (cost - problem.budget()) * penalty_multiplier : 0.0;
    return resilience(D, E, problem.scenario().mu) + rho;
}

std::size_t tournament_select(std::span<const Individual> pop, int size, Rng& rng)
{
    const std::size_t n = pop.size();
    const auto k = static_cast<std::size_t>(size);
    if (k == 0 || k > n)
        throw std::invalid_argument("tournament size exceeds population");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < k; ++i)
        std::swap(idx[i], idx[i + rng.index(n - i)]);
    std::size_t best = idx[0];
    for (std::size_t i = 1; i < k; ++i) {
        const std::size_t c = idx[i];
        if (pop[c].fitness < pop[best].fitness || (pop[c].fitness == pop[best].fitness && c < best))
            best = c;
    }
    return best;
}

std::size_t weighted_select(std::span<const Individual> pop, Rng& rng)
{
    std::vector<double> w(pop.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        const double f = pop[i].fitness;
        // A zero fitness is a perfect score; give it the largest finite weight.
        w[i] = std::isfinite(f) ? 1.0 / std::max(f, 1e-12) : 0.0;
        total += w[i];
    }
    if (!(total > 0.0) || !std::isfinite(total))
        return rng.index(pop.size());
    double u = rng.uniform() * total;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (u < w[i])
            return i;
        u -= w[i];
    }
    for (std::size_t i = w.size(); i-- > 0;)
        if (w[i] > 0.0)
            return i;
    return 0;
}

std::pair<std::vector<double>, std::vector<double>> crossover_at(std::span<const double> p1,
                                                                 std::span<const double> p2, std::size_t point,
                                                                 std::span<const double> headroom, double budget)
{
    if (p1.size() != p2.size())
        throw std::invalid_argument("crossover parents differ in length");
    if (p1.size() < 2)
        throw std::invalid_argument("crossover needs at least two genes");
    if (point < 1 || point >= p1.size())
        throw std::invalid_argument("crossover point out of range");
    std::vector<double> c1(p1.begin(), p1.begin() + static_cast<std::ptrdiff_t>(point));
    c1.insert(c1.end(), p2.begin() + static_cast<std::ptrdiff_t>(point), p2.end());
    std::vector<double> c2(p2.begin(), p2.begin() + static_cast<std::ptrdiff_t>(point));
    c2.insert(c2.end(), p1.begin() + static_cast<std::ptrdiff_t>(point), p1.end());
    enforce_budget(c1, headroom, budget);
    enforce_budget(c2, headroom, budget);
    return {std::move(c1), std::move(c2)};
}

std::pair<std::vector<double>, std::vector<double>> crossover(std::span<const double> p1, std::span<const double> p2,
                                                              std::span<const double> headroom, double budget,
                                                              Rng& rng)
{
    if (p1.size() < 2)
        throw std::invalid_argument("crossover needs at least two genes");
    const std::size_t point = 1 + rng.index(p1.size() - 1);
    return crossover_at(p1, p2, point, headroom, budget);
}

double transfer(std::vector<double>& recovery, std::size_t from, std::size_t to, double amount,
                std::span<const double> headroom)
{
    const double moved = std::clamp(std::min(amount, headroom[to] - recovery[to]), 0.0, recovery[from]);
    recovery[from] -= moved;
    recovery[to] += moved;
    return moved;
}

void mutate(std::vector<double>& recovery, double rate, std::span<const double> headroom, Rng& rng)
{
    if (!(rng.uniform() < rate))
        return;
    std::vector<std::size_t> sources;
    for (std::size_t i = 0; i < recovery.size(); ++i)
        if (recovery[i] > 0.0)
            sources.push_back(i);
    if (sources.empty())
        return;
    const std::size_t i = sources[rng.index(sources.size())];
    std::vector<std::size_t> sinks;
    for (std::size_t j = 0; j < recovery.size(); ++j)
        if (j != i && recovery[j] < headroom[j])
            sinks.push_back(j);
    if (sinks.empty())
        return;
    const std::size_t j = sinks[rng.index(sinks.size())];
    transfer(recovery, i, j, rng.uniform(0.0, recovery[i]), headroom);
}

std::vector<double> random_feasible_plan(std::span<const double> headroom, double budget, Rng& rng)
{
    std::vector<double> r(headroom.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = rng.uniform(0.0, headroom[i]);
    enforce_budget(r, headroom, budget);
    return r;
}

namespace {

using Clock = std::chrono::steady_clock;

GATraceRow trace_row(int generation, double best, std::span<const Individual> pop, Clock::time_point start)
{
    GATraceRow row;
    row.generation = generation;
    row.best_fitness = best;
    double sum = 0.0;
    std::size_t finite = 0;
    for (const Individual& ind : pop)
        if (std::isfinite(ind.fitness)) {
            sum += ind.fitness;
            ++finite;
        }
    row.mean_fitness = finite ? sum / static_cast<double>(finite) : std::numeric_limits<double>::infinity();
    row.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
    return row;
}

std::size_t fittest(std::span<const Individual> pop)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (pop[i].fitness < pop[best].fitness)
            best = i;
    return best;
}

}  // namespace

GAResult run_ga(const Problem& problem, const GAConfig& cfg)
{
    cfg.check();
    const auto start = Clock::now();
    const std::span<const double> head = problem.headroom();
    const double budget = problem.budget();
    const auto pop_size = static_cast<std::size_t>(cfg.population_size);
    std::uint64_t evaluations = 0;

    auto evaluate = [&](std::vector<Individual>& pop, std::size_t from) {
        parallel_for(pop.size() - from, cfg.jobs, [&](std::size_t k) {
            Individual& ind = pop[from + k];
            ind.fitness = ga_fitness(problem, ind.recovery, cfg.penalty_multiplier, cfg.fitness);
            ind.feasible = std::accumulate(ind.recovery.begin(), ind.recovery.end(), 0.0) <= budget + 1e-9;
        });
        evaluations += pop.size() - from;
    };

    std::vector<Individual> pop(pop_size);
    for (std::size_t j = 0; j < pop_size; ++j) {
        Rng rng(cfg.seed, {0, j});
        pop[j].recovery = random_feasible_plan(head, budget, rng);
    }
    evaluate(pop, 0);

    Individual best = pop[fittest(pop)];
    GAResult out;
    out.trace.push_back(trace_row(0, best.fitness, pop, start));

    for (int g = 1; g <= cfg.generations; ++g) {
        if (cfg.time_limit_s && std::chrono::duration<double>(Clock::now() - start).count() >= *cfg.time_limit_s)
            break;
        std::vector<Individual> next;
        next.reserve(pop_size + 1);
        if (cfg.elitism)
            next.push_back(pop[fittest(pop)]);
        const std::size_t fresh = next.size();
        for (std::size_t k = fresh; next.size() < pop_size; k += 2) {
            Rng rng(cfg.seed, {static_cast<std::uint64_t>(g), k});
            auto pick = [&] {
                return cfg.selection == SelectionMode::Tournament ? tournament_select(pop, cfg.tournament_size, rng)
                                                                  : weighted_select(pop, rng);
            };
            const std::size_t a = pick();
            const std::size_t b = pick();
            std::vector<double> c1;
            std::vector<double> c2;
            if (head.size() >= 2) {
                std::tie(c1, c2) = crossover(pop[a].recovery, pop[b].recovery, head, budget, rng);
            } else {
                c1 = pop[a].recovery;
                c2 = pop[b].recovery;
            }
            mutate(c1, cfg.mutation_rate, head, rng);
            mutate(c2, cfg.mutation_rate, head, rng);
            next.push_back(Individual{std::move(c1), 0.0, true});
            if (next.size() < pop_size)
                next.push_back(Individual{std::move(c2), 0.0, true});
        }
        evaluate(next, fresh);
        pop = std::move(next);
        const Individual& gen_best = pop[fittest(pop)];
        if (gen_best.fitness < best.fitness)
            best = gen_best;
        out.trace.push_back(trace_row(g, best.fitness, pop, start));
    }

    ProblemOptions opts = problem.options();
    opts.energy = cfg.fitness;
    out.solution = make_solution(problem.with_options(opts), best.recovery, "ga");
    out.solution.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
    out.solution.evaluations = evaluations;
    out.solution.converged = out.trace.size() == static_cast<std::size_t>(cfg.generations) + 1;
    return out;
}

}  // namespace eqr
