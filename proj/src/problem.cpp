#include "eqrestore/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace eqr {

namespace {

std::shared_ptr<const AssignmentResult> pre_disaster_assignment(const Network& net, const DemandTable& demand,
                                                                const Scenario& sc, const UEParams& ue)
{
    const std::vector<double> caps = net.capacities();
    return std::make_shared<const AssignmentResult>(
        solve_ue(net, demand, caps, ue, BprParams{sc.bpr_alpha, sc.bpr_beta}));
}

}  // namespace

Problem::Problem(Network net, DemandTable demand, Scenario sc, ProblemOptions opts)
    : net_(std::move(net)), demand_(std::move(demand)), sc_(std::move(sc)), opts_(opts)
{
    ValidationReport rep = validate(net_, demand_, sc_);
    if (!rep.ok()) {
        std::string msg = "invalid instance:";
        for (const std::string& e : rep.errors)
            msg += "\n  " + e;
        throw InputError(msg);
    }
    warnings_ = std::move(rep.warnings);
    headroom_ = sc_.headroom(net_);
    residual_caps_ = sc_.residual_capacities(net_);
    reference_ = pre_disaster_assignment(net_, demand_, sc_, opts_.ue);
    if (!(reference_->tstt > 0.0))
        throw InputError("pre-disaster travel time is zero; demand is empty");
    evaluations_ = std::make_shared<std::atomic<std::uint64_t>>(0);
}

Problem::Problem(const Problem& base, Scenario sc, ProblemOptions opts)
    : net_(base.net_),
      demand_(base.demand_),
      sc_(std::move(sc)),
      opts_(opts),
      warnings_(base.warnings_),
      reference_(base.reference_),
      evaluations_(std::make_shared<std::atomic<std::uint64_t>>(0))
{
    const bool same_damage =
        sc_.damaged.size() == base.sc_.damaged.size() &&
        std::equal(sc_.damaged.begin(), sc_.damaged.end(), base.sc_.damaged.begin(),
                   [](const DamagedLink& a, const DamagedLink& b) { return a.link == b.link && a.residual == b.residual; });
    if (!same_damage || sc_.bpr_alpha != base.sc_.bpr_alpha || sc_.bpr_beta != base.sc_.bpr_beta ||
        opts_.ue.gap_tolerance != base.opts_.ue.gap_tolerance ||
        opts_.ue.max_iterations != base.opts_.ue.max_iterations) {
        *this = Problem(net_, demand_, sc_, opts_);
        return;
    }
    ValidationReport rep = validate(net_, demand_, sc_);
    if (!rep.ok()) {
        std::string msg = "invalid instance:";
        for (const std::string& e : rep.errors)
            msg += "\n  " + e;
        throw InputError(msg);
    }
    headroom_ = sc_.headroom(net_);
    residual_caps_ = sc_.residual_capacities(net_);
}

Problem Problem::with_scenario(Scenario sc) const
{
    return Problem(*this, std::move(sc), opts_);
}

Problem Problem::with_options(ProblemOptions opts) const
{
    return Problem(*this, sc_, opts);
}

RestorationPlan Problem::plan(std::span<const double> recovery) const
{
    RestorationPlan p;
    p.links.reserve(sc_.damaged.size());
    for (const DamagedLink& d : sc_.damaged)
        p.links.push_back(d.link);
    p.recovery.assign(recovery.begin(), recovery.end());
    return p;
}

std::vector<double> Problem::capacities(std::span<const double> recovery) const
{
    std::vector<double> caps = residual_caps_;
    for (std::size_t i = 0; i < sc_.damaged.size(); ++i)
        caps[static_cast<std::size_t>(sc_.damaged[i].link - 1)] += recovery[i];
    return caps;
}

ObjectiveBreakdown Problem::energy(std::span<const double> recovery) const
{
    return opts_.energy == EnergyMode::Surrogate ? surrogate_energy(recovery) : full_energy(recovery);
}

ObjectiveBreakdown Problem::surrogate_energy(std::span<const double> recovery) const
{
    evaluations_->fetch_add(1, std::memory_order_relaxed);
    return hamiltonian(plan(recovery), sc_, net_, reference_->flows, opts_.objective);
}

double Problem::full_deficiency(std::span<const double> recovery) const
{
    const std::vector<double> caps = capacities(recovery);
    try {
        const AssignmentResult res = solve_ue(net_, demand_, caps, opts_.ue, bpr());
        return deficiency_full(reference_->tstt, res.tstt);
    } catch (const UnreachableError&) {
        return std::numeric_limits<double>::infinity();
    }
}

double Problem::equity(std::span<const double> recovery) const
{
    switch (opts_.objective.equity) {
    case EquityMode::Literal: return equity_literal(sc_);
    case EquityMode::Quadratic: return equity_quadratic(sc_, opts_.objective.w_bar);
    case EquityMode::Responsive: break;
    }
    return equity_responsive(plan(recovery), sc_, net_);
}

ObjectiveBreakdown Problem::finish(double D, std::span<const double> recovery) const
{
    ObjectiveBreakdown b;
    b.D = D;
    b.E = equity(recovery);
    b.R = resilience(b.D, b.E, sc_.mu);
    b.budget_penalty = budget_penalty(std::accumulate(recovery.begin(), recovery.end(), 0.0), sc_,
                                      opts_.objective.penalty);
    double overshoot = 0.0;
    for (std::size_t i = 0; i < recovery.size(); ++i) {
        const double over = std::max(0.0, recovery[i] - headroom_[i]);
        overshoot += over * over;
    }
    b.capacity_penalty = sc_.lambda2 * overshoot;
    b.H = b.R + b.budget_penalty + b.capacity_penalty;
    return b;
}

ObjectiveBreakdown Problem::full_energy(std::span<const double> recovery) const
{
    evaluations_->fetch_add(1, std::memory_order_relaxed);
    return finish(full_deficiency(recovery), recovery);
}

Solution make_solution(const Problem& problem, std::span<const double> recovery, std::string solver_name)
{
    Solution s;
    s.solver_name = std::move(solver_name);
    s.plan = problem.plan(recovery);
    s.breakdown = problem.energy(recovery);
    s.full = problem.options().energy == EnergyMode::Full ? s.breakdown : problem.full_energy(recovery);
    s.feasible = s.breakdown.budget_penalty < 1e-6 && s.breakdown.capacity_penalty < 1e-6;
    bool bounds = true;
    const auto head = problem.headroom();
    for (std::size_t i = 0; i < recovery.size(); ++i)
        bounds = bounds && recovery[i] >= 0.0 && recovery[i] <= head[i] + 1e-12;
    s.within_budget = bounds && s.plan.cost() <= problem.budget() + 1e-6;
    return s;
}

void enforce_budget(std::vector<double>& recovery, std::span<const double> headroom, double budget)
{
    const double total = std::accumulate(recovery.begin(), recovery.end(), 0.0);
    if (total > budget) {
        const double factor = total > 0.0 ? budget / total : 0.0;
        for (double& r : recovery)
            r *= factor;
    }
    for (std::size_t i = 0; i < recovery.size(); ++i)
        recovery[i] = std::clamp(recovery[i], 0.0, headroom[i]);
    // Scaling can land a hair above the budget in floating point.
    double cost = std::accumulate(recovery.begin(), recovery.end(), 0.0);
    for (std::size_t i = 0; cost > budget && i < recovery.size(); ++i) {
        const double cut = std::min(recovery[i], cost - budget);
        recovery[i] -= cut;
        cost = std::accumulate(recovery.begin(), recovery.end(), 0.0);
    }
}

}  // namespace eqr
