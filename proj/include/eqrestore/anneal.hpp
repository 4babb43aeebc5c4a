#pragma once

#include "eqrestore/problem.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace eqr {

struct AnnealConfig {
    /// Unset: standard deviation of H over 100 random feasible plans.
    std::optional<double> initial_temperature;
    double cooling_factor = 0.95;
    /// Unset: 50 per damaged link.
    std::optional<int> steps_per_temperature;
    /// Unset: 1e-6 of the initial temperature.
    std::optional<double> min_temperature;
    /// Starting move size as a fraction of link headroom; adapted per level.
    double move_scale = 0.1;
    double transfer_probability = 0.5;
    std::uint64_t seed = 1;
    int restarts = 3;
    /// Relative to |best H| after the main schedule; a second schedule with
    /// the same cooling and span starts there. 0 disables it.
    double refine_temperature = 1e-2;
    /// Deterministic coordinate descent from the best state after annealing.
    bool polish = true;
    int jobs = 1;

    void check() const;
};

struct AnnealTraceRow {
    std::uint64_t step = 0;
    double temperature = 0.0;
    double current_H = 0.0;
    double best_H = 0.0;
};

struct AnnealResult {
    Solution solution;
    /// Trace of the winning restart, one row per temperature level.
    std::vector<AnnealTraceRow> trace;
    int best_restart = 0;
    double initial_temperature = 0.0;
};

/// Standard deviation of problem.energy().H over `samples` random feasible plans.
double estimate_temperature(const Problem& problem, std::uint64_t seed, int samples = 100);

AnnealResult run_sa(const Problem& problem, const AnnealConfig& cfg = {});

/// Adds `step` to whichever link lowers H most until the budget is spent or
/// no increment helps.
Solution greedy_marginal(const Problem& problem, double step);

/// Exhaustive search over {0, h/(g-1), ..., h} per link. Throws
/// std::invalid_argument when grid^links exceeds 1e7.
Solution brute_force(const Problem& problem, int grid);

double brute_force_size(std::size_t links, int grid);

}  // namespace eqr
