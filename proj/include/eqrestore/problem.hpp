#pragma once

#include "eqrestore/assignment.hpp"
#include "eqrestore/network.hpp"
#include "eqrestore/objectives.hpp"

#include <atomic>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace eqr {

enum class EnergyMode {
    Surrogate,  // fixed reference flows, no equilibrium re-solve
    Full,       // user equilibrium re-solved per evaluation
};

struct ProblemOptions {
    ObjectiveOptions objective;
    EnergyMode energy = EnergyMode::Surrogate;
    UEParams ue;
};

/// A validated restoration instance plus its pre-disaster equilibrium.
/// Recovery vectors are indexed in the scenario's damaged-link order.
/// Const member functions are safe to call concurrently.
class Problem {
public:
    /// Throws InputError listing every validation error.
    Problem(Network net, DemandTable demand, Scenario sc, ProblemOptions opts = {});

    const Network& network() const noexcept { return net_; }
    const DemandTable& demand() const noexcept { return demand_; }
    const Scenario& scenario() const noexcept { return sc_; }
    const ProblemOptions& options() const noexcept { return opts_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    std::size_t dimension() const noexcept { return headroom_.size(); }
    std::span<const double> headroom() const noexcept { return headroom_; }
    double budget() const noexcept { return sc_.budget; }
    BprParams bpr() const noexcept { return BprParams{sc_.bpr_alpha, sc_.bpr_beta}; }

    /// Pre-disaster equilibrium; its flows are the surrogate's reference flows.
    const AssignmentResult& reference() const noexcept { return *reference_; }
    double baseline_tstt() const noexcept { return reference_->tstt; }

    RestorationPlan plan(std::span<const double> recovery) const;
    std::vector<double> capacities(std::span<const double> recovery) const;

    /// Energy selected by options().energy.
    ObjectiveBreakdown energy(std::span<const double> recovery) const;
    ObjectiveBreakdown surrogate_energy(std::span<const double> recovery) const;
    /// Deficiency from a fresh equilibrium at the plan's capacities.
    ObjectiveBreakdown full_energy(std::span<const double> recovery) const;

    /// (T1 - T0) / T0 with T1 from solve_ue; +inf when the plan leaves an OD pair unreachable.
    double full_deficiency(std::span<const double> recovery) const;
    double equity(std::span<const double> recovery) const;

    /// Same instance with a different scenario (budget, mu, ...) but identical
    /// network, demand, damage set and BPR parameters; reuses the reference assignment.
    Problem with_scenario(Scenario sc) const;
    Problem with_options(ProblemOptions opts) const;

    std::uint64_t evaluations() const noexcept { return evaluations_->load(std::memory_order_relaxed); }

private:
    Problem(const Problem& base, Scenario sc, ProblemOptions opts);

    ObjectiveBreakdown finish(double D, std::span<const double> recovery) const;

    Network net_;
    DemandTable demand_;
    Scenario sc_;
    ProblemOptions opts_;
    std::vector<std::string> warnings_;
    std::vector<double> headroom_;
    std::vector<double> residual_caps_;
    std::shared_ptr<const AssignmentResult> reference_;
    std::shared_ptr<std::atomic<std::uint64_t>> evaluations_;
};

/// A solver's answer. `breakdown` is the energy used by the solver, recomputed
/// from `plan` at return; `full` re-scores the plan with a fresh equilibrium.
struct Solution {
    RestorationPlan plan;
    ObjectiveBreakdown breakdown;
    ObjectiveBreakdown full;
    std::string solver_name;
    double wall_time_s = 0.0;
    std::uint64_t evaluations = 0;
    bool converged = false;
    bool feasible = false;       // both Hamiltonian penalties below 1e-6
    bool within_budget = false;  // cost <= B + 1e-6 and 0 <= C_a^1 <= headroom
};

/// Fills breakdown/full/flags for `recovery`.
Solution make_solution(const Problem& problem, std::span<const double> recovery, std::string solver_name);

/// Scales the plan down to the budget when it overspends, then clamps each
/// entry into [0, headroom].
void enforce_budget(std::vector<double>& recovery, std::span<const double> headroom, double budget);

}  // namespace eqr
