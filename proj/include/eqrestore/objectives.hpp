#pragma once

#include "eqrestore/assignment.hpp"
#include "eqrestore/network.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eqr {

/// Capacity recovery C_a^1 per damaged link. Restoration cost is uniform, so
/// the plan cost is the plain sum of recoveries.
struct RestorationPlan {
    std::vector<int> links;
    std::vector<double> recovery;

    double cost() const;
    double recovery_of(int link) const;
};

struct ObjectiveBreakdown {
    double D = 0.0;
    double E = 0.0;
    double R = 0.0;
    double budget_penalty = 0.0;
    double capacity_penalty = 0.0;
    double H = 0.0;
};

/// Flat `key=value` record.
std::string format_breakdown(const ObjectiveBreakdown& b);

enum class EquityMode { Literal, Quadratic, Responsive };
enum class PenaltyMode { Equality, OneSided };

std::optional<EquityMode> parse_equity_mode(std::string_view s);
std::optional<PenaltyMode> parse_penalty_mode(std::string_view s);
std::string_view to_string(EquityMode m);
std::string_view to_string(PenaltyMode m);

/// Relative TSTT increase of the restored network over the pre-disaster one,
/// (T1 - T0) / T0, floored at zero. Throws std::invalid_argument if T0 <= 0.
double deficiency_full(double tstt_before, double tstt_after);

/// Fixed-flow deficiency: flows stay at a reference assignment while only
/// capacities change, so no equilibrium re-solve is needed. Throws when a
/// post capacity below kCapacityEpsilon carries flow, or no link carries flow.
double deficiency_surrogate(std::span<const double> flows, std::span<const double> caps_pre,
                            std::span<const double> caps_post, std::span<const double> free_flow_times,
                            const BprParams& bpr);

/// Mean absolute pairwise difference over twice the mean:
/// sum_r sum_s |v_r - v_s| / (2 n^2 mean). `mean` overrides the sample mean.
/// Throws std::invalid_argument when the mean is not positive.
double gini(std::span<const double> values, std::optional<double> mean = std::nullopt);

/// Gini over zone incomes; independent of the restoration plan.
double equity_literal(const Scenario& sc);

/// Squared-difference variant, sum (I_r - I_s)^2 / (2 N^2 w_bar mean(I)).
double equity_quadratic(const Scenario& sc, double w_bar = 1.0);

/// Plan-sensitive equity: Gini over I_r * rho_r where rho_r is the restored
/// share of recoverable capacity on damaged links touching zone r (1 for
/// zones without damaged links). Zero when every zone value is zero.
double equity_responsive(const RestorationPlan& plan, const Scenario& sc, const Network& net);

double resilience(double D, double E, double mu);

struct ObjectiveOptions {
    EquityMode equity = EquityMode::Responsive;
    PenaltyMode penalty = PenaltyMode::Equality;
    double w_bar = 1.0;
};

double budget_penalty(double cost, const Scenario& sc, PenaltyMode mode);

/// Penalty Hamiltonian with the fixed-flow deficiency. `flows` is the
/// reference assignment. Post capacities are floored at kCapacityEpsilon so
/// an unrestored link that carried reference flow yields a large finite
/// deficiency instead of an error.
ObjectiveBreakdown hamiltonian(const RestorationPlan& plan, const Scenario& sc, const Network& net,
                               std::span<const double> flows, const ObjectiveOptions& opts = {});

}  // namespace eqr
