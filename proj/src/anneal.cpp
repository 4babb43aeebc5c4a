#include "eqrestore/anneal.hpp"

#include "eqrestore/ga.hpp"
#include "eqrestore/parallel.hpp"
#include "eqrestore/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace eqr {

void AnnealConfig::check() const
{
    if (initial_temperature && !(*initial_temperature > 0.0))
        throw std::invalid_argument("initial_temperature must be positive");
    if (min_temperature && !(*min_temperature > 0.0))
        throw std::invalid_argument("min_temperature must be positive");
    if (!(cooling_factor > 0.0 && cooling_factor < 1.0))
        throw std::invalid_argument("cooling_factor must lie in (0, 1)");
    if (steps_per_temperature && *steps_per_temperature < 1)
        throw std::invalid_argument("steps_per_temperature must be at least 1");
    if (!(move_scale > 0.0 && move_scale <= 1.0))
        throw std::invalid_argument("move_scale must lie in (0, 1]");
    if (!(transfer_probability >= 0.0 && transfer_probability <= 1.0))
        throw std::invalid_argument("transfer_probability must lie in [0, 1]");
    if (restarts < 1)
        throw std::invalid_argument("restarts must be at least 1");
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kTemperatureStream = 0x7465;
constexpr std::uint64_t kRestartStream = 0x7361;

double energy_of(const Problem& problem, std::span<const double> x)
{
    return problem.energy(x).H;
}

struct RestartOutcome {
    std::vector<double> best;
    double best_H = std::numeric_limits<double>::infinity();
    std::vector<AnnealTraceRow> trace;
};

class Chain {
public:
    Chain(const Problem& problem, const AnnealConfig& cfg, int steps, int restart)
        : problem_(problem),
          cfg_(cfg),
          head_(problem.headroom()),
          steps_(steps),
          rng_(cfg.seed, {kRestartStream, static_cast<std::uint64_t>(restart)})
    {
        x_ = random_feasible_plan(head_, problem.budget(), rng_);
        hx_ = energy_of(problem, x_);
        out_.best = x_;
        out_.best_H = hx_;
    }

    /// Geometric cooling from t_hi down to t_lo.
    void run(double t_hi, double t_lo)
    {
        if (head_.empty())
            return;
        double scale = cfg_.move_scale;
        for (double T = t_hi; T >= t_lo; T *= cfg_.cooling_factor) {
            int accepted = 0;
            for (int s = 0; s < steps_; ++s, ++step_)
                accepted += sweep_once(T, scale);
            const double ratio = static_cast<double>(accepted) / static_cast<double>(steps_);
            if (ratio > 0.6)
                scale = std::min(1.0, scale * 1.5);
            else if (ratio < 0.2)
                scale = std::max(1e-9, scale * 0.6);
            out_.trace.push_back(AnnealTraceRow{step_, T, hx_, out_.best_H});
        }
    }

    void restart_from_best()
    {
        x_ = out_.best;
        hx_ = out_.best_H;
    }

    RestartOutcome take() { return std::move(out_); }
    double best_H() const { return out_.best_H; }

private:
    bool sweep_once(double T, double scale)
    {
        const std::size_t n = head_.size();
        y_ = x_;
        bool moved = false;
        if (n >= 2 && rng_.uniform() < cfg_.transfer_probability) {
            funded_.clear();
            for (std::size_t i = 0; i < n; ++i)
                if (y_[i] > 0.0)
                    funded_.push_back(i);
            if (!funded_.empty()) {
                const std::size_t i = funded_[rng_.index(funded_.size())];
                std::size_t j = rng_.index(n - 1);
                if (j >= i)
                    ++j;
                const double amount = rng_.uniform() * scale * std::max(head_[i], head_[j]);
                moved = transfer(y_, i, j, amount, head_) > 0.0;
            }
        }
        if (!moved) {
            const std::size_t i = rng_.index(n);
            y_[i] = std::clamp(y_[i] + rng_.normal() * scale * head_[i], 0.0, head_[i]);
        }
        const double hy = energy_of(problem_, y_);
        const double dh = hy - hx_;
        if (!(dh <= 0.0 || rng_.uniform() < std::exp(-dh / T)))
            return false;
        std::swap(x_, y_);
        hx_ = hy;
        if (hx_ < out_.best_H) {
            out_.best_H = hx_;
            out_.best = x_;
        }
        return true;
    }

    const Problem& problem_;
    const AnnealConfig& cfg_;
    std::span<const double> head_;
    int steps_;
    Rng rng_;
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<std::size_t> funded_;
    double hx_ = 0.0;
    std::uint64_t step_ = 0;
    RestartOutcome out_;
};

RestartOutcome anneal_once(const Problem& problem, const AnnealConfig& cfg, double t0, double t_min, int steps,
                           int restart)
{
    Chain chain(problem, cfg, steps, restart);
    chain.run(t0, t_min);
    // The default start temperature is set by the spread of random plans,
    // which can dwarf the energy gaps among good plans. Rerun the same
    // schedule span from the best state at a temperature tied to its energy.
    if (cfg.refine_temperature > 0.0 && std::isfinite(chain.best_H())) {
        const double t_ref = cfg.refine_temperature * std::max(std::abs(chain.best_H()), 1e-12);
        if (t_ref < t_min) {
            chain.restart_from_best();
            chain.run(t_ref, t_ref * t_min / t0);
        }
    }
    return chain.take();
}

// Coordinate descent with halving step: single-link moves and pairwise
// transfers, first improvement wins.
double polish(const Problem& problem, std::vector<double>& x, double hx)
{
    const std::span<const double> head = problem.headroom();
    const std::size_t n = x.size();
    if (n == 0)
        return hx;
    const double hmax = *std::max_element(head.begin(), head.end());
    std::vector<double> y;
    auto try_move = [&](auto&& edit) {
        y = x;
        if (!edit(y))
            return false;
        const double hy = energy_of(problem, y);
        if (hy < hx) {
            std::swap(x, y);
            hx = hy;
            return true;
        }
        return false;
    };
    for (double delta = 0.05 * hmax; delta > 1e-9 * hmax; delta *= 0.5) {
        for (int sweep = 0; sweep < 50; ++sweep) {
            bool improved = false;
            for (std::size_t i = 0; i < n; ++i) {
                for (double sign : {1.0, -1.0}) {
                    improved |= try_move([&](std::vector<double>& v) {
                        const double next = std::clamp(v[i] + sign * delta, 0.0, head[i]);
                        if (next == v[i])
                            return false;
                        v[i] = next;
                        return true;
                    });
                }
                for (std::size_t j = 0; j < n; ++j) {
                    if (j == i)
                        continue;
                    improved |= try_move([&](std::vector<double>& v) { return transfer(v, i, j, delta, head) > 0.0; });
                }
            }
            if (!improved)
                break;
        }
    }
    return hx;
}

}  // namespace

double estimate_temperature(const Problem& problem, std::uint64_t seed, int samples)
{
    Rng rng(seed, {kTemperatureStream});
    std::vector<double> hs;
    hs.reserve(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) {
        const std::vector<double> x = random_feasible_plan(problem.headroom(), problem.budget(), rng);
        const double h = energy_of(problem, x);
        if (std::isfinite(h))
            hs.push_back(h);
    }
    if (hs.size() < 2)
        return 1.0;
    const double mean = std::accumulate(hs.begin(), hs.end(), 0.0) / static_cast<double>(hs.size());
    double var = 0.0;
    for (double h : hs)
        var += (h - mean) * (h - mean);
    const double sd = std::sqrt(var / static_cast<double>(hs.size() - 1));
    if (sd > 0.0)
        return sd;
    return 1e-6 * std::max(1.0, std::abs(mean));
}

AnnealResult run_sa(const Problem& problem, const AnnealConfig& cfg)
{
    cfg.check();
    const auto start = Clock::now();
    const std::uint64_t evals_before = problem.evaluations();

    const double t0 = cfg.initial_temperature ? *cfg.initial_temperature : estimate_temperature(problem, cfg.seed);
    const double t_min = cfg.min_temperature ? *cfg.min_temperature : 1e-6 * t0;
    const int steps = cfg.steps_per_temperature ? *cfg.steps_per_temperature
                                                : std::max(1, 50 * static_cast<int>(problem.dimension()));

    std::vector<RestartOutcome> runs(static_cast<std::size_t>(cfg.restarts));
    parallel_for(runs.size(), cfg.jobs, [&](std::size_t k) {
        runs[k] = anneal_once(problem, cfg, t0, t_min, steps, static_cast<int>(k));
    });
    std::size_t winner = 0;
    for (std::size_t k = 1; k < runs.size(); ++k)
        if (runs[k].best_H < runs[winner].best_H)
            winner = k;

    std::vector<double> x = std::move(runs[winner].best);
    double hx = runs[winner].best_H;
    if (cfg.polish)
        hx = polish(problem, x, hx);
    // Penalties make overspending cheap but not free; the returned plan must
    // respect the budget as a hard limit.
    enforce_budget(x, problem.headroom(), problem.budget());

    AnnealResult out;
    out.trace = std::move(runs[winner].trace);
    out.best_restart = static_cast<int>(winner);
    out.initial_temperature = t0;
    out.solution = make_solution(problem, x, "sa");
    out.solution.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
    out.solution.evaluations = problem.evaluations() - evals_before;
    out.solution.converged = true;
    return out;
}

Solution greedy_marginal(const Problem& problem, double step)
{
    if (!(step > 0.0))
        throw std::invalid_argument("greedy step must be positive");
    const auto start = Clock::now();
    const std::uint64_t evals_before = problem.evaluations();
    const std::span<const double> head = problem.headroom();
    const std::size_t n = head.size();
    std::vector<double> x(n, 0.0);
    double cost = 0.0;
    double hx = energy_of(problem, x);
    std::vector<double> y;
    for (;;) {
        const double room = problem.budget() - cost;
        std::size_t pick = n;
        double best_h = hx;
        double best_inc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double inc = std::min({step, head[i] - x[i], room});
            if (!(inc > 1e-12))
                continue;
            y = x;
            y[i] += inc;
            const double hy = energy_of(problem, y);
            if (hy < best_h) {
                best_h = hy;
                pick = i;
                best_inc = inc;
            }
        }
        if (pick == n)
            break;
        x[pick] += best_inc;
        cost += best_inc;
        hx = best_h;
    }
    Solution s = make_solution(problem, x, "greedy");
    s.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
    s.evaluations = problem.evaluations() - evals_before;
    s.converged = true;
    return s;
}

double brute_force_size(std::size_t links, int grid)
{
    return std::pow(static_cast<double>(grid), static_cast<double>(links));
}

Solution brute_force(const Problem& problem, int grid)
{
    if (grid < 2)
        throw std::invalid_argument("brute force grid needs at least 2 levels");
    const std::size_t n = problem.dimension();
    if (brute_force_size(n, grid) > 1e7)
        throw std::invalid_argument("instance too large for brute force: " + std::to_string(grid) + "^" +
                                    std::to_string(n) + " grid points");
    const auto start = Clock::now();
    const std::uint64_t evals_before = problem.evaluations();
    const std::span<const double> head = problem.headroom();
    const double g1 = static_cast<double>(grid - 1);

    std::vector<int> level(n, 0);
    std::vector<double> x(n, 0.0);
    std::vector<double> best = x;
    double best_h = std::numeric_limits<double>::infinity();
    for (;;) {
        for (std::size_t i = 0; i < n; ++i)
            x[i] = level[i] == grid - 1 ? head[i] : head[i] * static_cast<double>(level[i]) / g1;
        const double h = energy_of(problem, x);
        if (h < best_h) {
            best_h = h;
            best = x;
        }
        std::size_t i = 0;
        while (i < n && ++level[i] == grid)
            level[i++] = 0;
        if (i == n)
            break;
    }
    Solution s = make_solution(problem, best, "oracle");
    s.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
    s.evaluations = problem.evaluations() - evals_before;
    s.converged = true;
    return s;
}

}  // namespace eqr
