#pragma once

#include "eqrestore/problem.hpp"
#include "eqrestore/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace eqr {

enum class SelectionMode {
    Tournament,  // argmin over a random subset
    Weighted,    // roulette wheel with weight 1 / fitness
};

struct GAConfig {
    int population_size = 50;
    double mutation_rate = 0.1;
    int tournament_size = 3;
    double penalty_multiplier = 7000.0;
    int generations = 200;
    bool elitism = true;
    std::uint64_t seed = 1;
    EnergyMode fitness = EnergyMode::Full;
    SelectionMode selection = SelectionMode::Tournament;
    std::optional<double> time_limit_s;
    int jobs = 1;

    /// Throws std::invalid_argument naming the offending field.
    void check() const;
};

struct Individual {
    std::vector<double> recovery;
    double fitness = 0.0;
    bool feasible = true;  // cost within budget
};

struct GATraceRow {
    int generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;  // over individuals with finite fitness
    double elapsed_s = 0.0;
};

struct GAResult {
    Solution solution;
    std::vector<GATraceRow> trace;
};

/// R_j = mu D_j + (1 - mu) E_j + rho_j, rho_j = (cost - B) * multiplier when
/// cost exceeds B. D_j is the full equilibrium deficiency unless `mode` asks
/// for the fixed-flow one; a disconnected plan scores +inf.
double ga_fitness(const Problem& problem, std::span<const double> recovery, double penalty_multiplier,
                  EnergyMode mode = EnergyMode::Full);

/// Draws `size` distinct members and returns the index of the fittest;
/// ties go to the lower index.
std::size_t tournament_select(std::span<const Individual> pop, int size, Rng& rng);

/// Roulette selection with weights 1 / fitness. Infinite fitness has zero
/// weight; a population with no positive weight falls back to uniform.
std::size_t weighted_select(std::span<const Individual> pop, Rng& rng);

/// Single-point crossover at `point` in [1, len - 1]; both children are
/// repaired with enforce_budget.
std::pair<std::vector<double>, std::vector<double>> crossover_at(std::span<const double> p1,
                                                                 std::span<const double> p2, std::size_t point,
                                                                 std::span<const double> headroom, double budget);

std::pair<std::vector<double>, std::vector<double>> crossover(std::span<const double> p1, std::span<const double> p2,
                                                              std::span<const double> headroom, double budget,
                                                              Rng& rng);

/// Moves `amount` (clamped to what slot j can absorb and what slot i holds)
/// from slot i to slot j. Returns the amount actually moved.
double transfer(std::vector<double>& recovery, std::size_t from, std::size_t to, double amount,
                std::span<const double> headroom);

/// With probability `rate`, moves U[0, r_i] from a random funded slot i to a
/// random slot j != i that has headroom left. Cost is preserved.
void mutate(std::vector<double>& recovery, double rate, std::span<const double> headroom, Rng& rng);

/// U[0, headroom] per slot, then enforce_budget.
std::vector<double> random_feasible_plan(std::span<const double> headroom, double budget, Rng& rng);

GAResult run_ga(const Problem& problem, const GAConfig& cfg);

}  // namespace eqr
