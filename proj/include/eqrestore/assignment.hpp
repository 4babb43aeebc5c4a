#pragma once

#include "eqrestore/network.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqr {

struct BprParams {
    double alpha = 0.15;
    double beta = 4.0;
};

/// t0 * (1 + alpha * (x/c)^beta). Throws std::domain_error when c <= kCapacityEpsilon.
double bpr_time(double t0, double flow, double capacity, const BprParams& bpr);
/// Closed-form integral of bpr_time over [0, flow].
double bpr_integral(double t0, double flow, double capacity, const BprParams& bpr);

/// Some positive-demand OD pair has no route at the given capacities.
class UnreachableError : public std::runtime_error {
public:
    UnreachableError(int origin, int destination);
    int origin() const noexcept { return origin_; }
    int destination() const noexcept { return destination_; }

private:
    int origin_;
    int destination_;
};

struct ShortestPathTree {
    int origin = 0;
    std::vector<double> distance;  // index zone; +inf when unreachable
    std::vector<int> pred_link;    // zero-based link index, -1 at origin/unreachable
    std::vector<int> settle_order; // zones in non-decreasing distance
};

/// Dijkstra over non-negative link times; links with infinite time are skipped.
/// Equal-distance ties keep the lower link id.
ShortestPathTree shortest_path_tree(const Network& net, std::span<const double> times, int origin);

/// Loads every OD demand on its current shortest path.
std::vector<double> all_or_nothing(const Network& net, std::span<const double> times, const DemandTable& demand);

struct UEParams {
    int max_iterations = 500;
    double gap_tolerance = 1e-4;
    double line_search_tolerance = 1e-8;
};

struct AssignmentResult {
    std::vector<double> flows;  // per link, demand units
    std::vector<double> times;  // per link, minutes; +inf for links removed from routing
    double tstt = 0.0;
    double relative_gap = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> beckmann;  // objective after each iteration
};

/// Link travel times at the given flows; links at or below kCapacityEpsilon get +inf.
std::vector<double> link_times(const Network& net, std::span<const double> flows, std::span<const double> capacities,
                               const BprParams& bpr);

double beckmann_objective(const Network& net, std::span<const double> flows, std::span<const double> capacities,
                          const BprParams& bpr);

/// Link-based Frank-Wolfe user equilibrium. Throws UnreachableError when a
/// positive-demand pair cannot be routed. Non-convergence is reported via
/// `converged == false`.
AssignmentResult solve_ue(const Network& net, const DemandTable& demand, std::span<const double> capacities,
                          const UEParams& params = {}, const BprParams& bpr = {});

/// Sum of x_a * t_a over links carrying flow.
double total_travel_time(const AssignmentResult& r);
double total_travel_time(std::span<const double> flows, std::span<const double> times);

/// Largest |inflow + originating - outflow - terminating| over zones.
double conservation_residual(const Network& net, const DemandTable& demand, std::span<const double> flows);

/// Rows `link_id flow time`.
std::string format_flows(const AssignmentResult& r);

}  // namespace eqr
