#include "eqrestore/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <queue>
#include <sstream>

namespace eqr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double ratio_pow(double ratio, double beta)
{
    if (beta == 4.0) {
        const double r2 = ratio * ratio;
        return r2 * r2;
    }
    return std::pow(ratio, beta);
}

inline double bpr_unchecked(double t0, double flow, double capacity, const BprParams& bpr)
{
    return t0 * (1.0 + bpr.alpha * ratio_pow(flow / capacity, bpr.beta));
}

}  // namespace

double bpr_time(double t0, double flow, double capacity, const BprParams& bpr)
{
    if (!(capacity > kCapacityEpsilon))
        throw std::domain_error("BPR capacity below epsilon");
    return bpr_unchecked(t0, flow, capacity, bpr);
}

double bpr_integral(double t0, double flow, double capacity, const BprParams& bpr)
{
    if (!(capacity > kCapacityEpsilon))
        throw std::domain_error("BPR capacity below epsilon");
    return t0 * flow + bpr.alpha * t0 * flow * ratio_pow(flow / capacity, bpr.beta) / (bpr.beta + 1.0);
}

UnreachableError::UnreachableError(int origin, int destination)
    : std::runtime_error("OD (" + std::to_string(origin) + "," + std::to_string(destination) + ") unreachable"),
      origin_(origin),
      destination_(destination)
{
}

ShortestPathTree shortest_path_tree(const Network& net, std::span<const double> times, int origin)
{
    const auto n = static_cast<std::size_t>(net.zone_count()) + 1;
    ShortestPathTree tree;
    tree.origin = origin;
    tree.distance.assign(n, kInf);
    tree.pred_link.assign(n, -1);
    tree.settle_order.reserve(n);
    std::vector<bool> settled(n, false);

    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    tree.distance[static_cast<std::size_t>(origin)] = 0.0;
    heap.emplace(0.0, origin);
    const auto links = net.links();
    while (!heap.empty()) {
        const auto [d, z] = heap.top();
        heap.pop();
        const auto zi = static_cast<std::size_t>(z);
        if (settled[zi] || d > tree.distance[zi])
            continue;
        settled[zi] = true;
        tree.settle_order.push_back(z);
        for (int li : net.outgoing(z)) {
            const double t = times[static_cast<std::size_t>(li)];
            if (!std::isfinite(t))
                continue;
            const auto to = static_cast<std::size_t>(links[static_cast<std::size_t>(li)].to);
            if (settled[to])
                continue;
            const double nd = d + t;
            if (nd < tree.distance[to]) {
                tree.distance[to] = nd;
                tree.pred_link[to] = li;
                heap.emplace(nd, static_cast<int>(to));
            } else if (nd == tree.distance[to] && li < tree.pred_link[to]) {
                tree.pred_link[to] = li;
            }
        }
    }
    return tree;
}

namespace {

void load_origin(const Network& net, const ShortestPathTree& tree, const DemandTable& demand,
                 std::vector<double>& node_flow, std::vector<double>& flows)
{
    const int r = tree.origin;
    std::fill(node_flow.begin(), node_flow.end(), 0.0);
    for (int s = 1; s <= net.zone_count(); ++s) {
        const double q = demand.at(r, s);
        if (q <= 0.0)
            continue;
        if (!std::isfinite(tree.distance[static_cast<std::size_t>(s)]))
            throw UnreachableError(r, s);
        node_flow[static_cast<std::size_t>(s)] = q;
    }
    const auto links = net.links();
    for (auto it = tree.settle_order.rbegin(); it != tree.settle_order.rend(); ++it) {
        const auto z = static_cast<std::size_t>(*it);
        const int li = tree.pred_link[z];
        if (li < 0 || node_flow[z] == 0.0)
            continue;
        flows[static_cast<std::size_t>(li)] += node_flow[z];
        node_flow[static_cast<std::size_t>(links[static_cast<std::size_t>(li)].from)] += node_flow[z];
    }
}

}  // namespace

std::vector<double> all_or_nothing(const Network& net, std::span<const double> times, const DemandTable& demand)
{
    std::vector<double> flows(net.link_count(), 0.0);
    std::vector<double> node_flow(static_cast<std::size_t>(net.zone_count()) + 1, 0.0);
    for (int r = 1; r <= net.zone_count(); ++r) {
        if (demand.origin_total(r) <= 0.0)
            continue;
        load_origin(net, shortest_path_tree(net, times, r), demand, node_flow, flows);
    }
    return flows;
}

std::vector<double> link_times(const Network& net, std::span<const double> flows, std::span<const double> capacities,
                               const BprParams& bpr)
{
    std::vector<double> times(net.link_count());
    const auto links = net.links();
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double c = capacities[i];
        times[i] = c > kCapacityEpsilon ? bpr_unchecked(links[i].free_flow_time, flows[i], c, bpr) : kInf;
    }
    return times;
}

double beckmann_objective(const Network& net, std::span<const double> flows, std::span<const double> capacities,
                          const BprParams& bpr)
{
    double sum = 0.0;
    const auto links = net.links();
    for (std::size_t i = 0; i < links.size(); ++i)
        if (capacities[i] > kCapacityEpsilon)
            sum += bpr_integral(links[i].free_flow_time, flows[i], capacities[i], bpr);
    return sum;
}

double total_travel_time(std::span<const double> flows, std::span<const double> times)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < flows.size(); ++i)
        if (flows[i] > 0.0)
            sum += flows[i] * times[i];
    return sum;
}

double total_travel_time(const AssignmentResult& r)
{
    return total_travel_time(r.flows, r.times);
}

AssignmentResult solve_ue(const Network& net, const DemandTable& demand, std::span<const double> capacities,
                          const UEParams& params, const BprParams& bpr)
{
    if (!(params.gap_tolerance > 0.0) || !(params.line_search_tolerance > 0.0) || params.max_iterations < 1)
        throw std::invalid_argument("UE tolerances must be positive");

    const std::size_t m = net.link_count();
    const auto links = net.links();
    AssignmentResult res;
    res.flows.assign(m, 0.0);

    if (demand.total() <= 0.0) {
        res.times = link_times(net, res.flows, capacities, bpr);
        res.converged = true;
        return res;
    }

    std::vector<double> free_times = link_times(net, res.flows, capacities, bpr);
    res.flows = all_or_nothing(net, free_times, demand);
    res.times = link_times(net, res.flows, capacities, bpr);
    res.beckmann.push_back(beckmann_objective(net, res.flows, capacities, bpr));

    std::vector<double> direction(m);
    for (int it = 1; it <= params.max_iterations; ++it) {
        res.iterations = it;
        const std::vector<double> target = all_or_nothing(net, res.times, demand);
        const double current = total_travel_time(res.flows, res.times);
        const double lower = total_travel_time(target, res.times);
        res.relative_gap = current > 0.0 ? std::max(0.0, (current - lower) / current) : 0.0;
        if (res.relative_gap <= params.gap_tolerance) {
            res.converged = true;
            break;
        }
        if (it == params.max_iterations)
            break;

        for (std::size_t i = 0; i < m; ++i)
            direction[i] = target[i] - res.flows[i];

        // Bisection on the directional derivative of the Beckmann objective.
        auto slope = [&](double step) {
            double g = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                if (direction[i] == 0.0)
                    continue;
                g += direction[i] * bpr_unchecked(links[i].free_flow_time, res.flows[i] + step * direction[i],
                                                  capacities[i], bpr);
            }
            return g;
        };
        double lo = 0.0;
        double hi = 1.0;
        double step = 1.0;
        if (slope(1.0) > 0.0) {
            while (hi - lo > params.line_search_tolerance) {
                const double mid = 0.5 * (lo + hi);
                if (slope(mid) > 0.0)
                    hi = mid;
                else
                    lo = mid;
            }
            step = 0.5 * (lo + hi);
        }
        for (std::size_t i = 0; i < m; ++i)
            res.flows[i] = std::max(0.0, res.flows[i] + step * direction[i]);
        res.times = link_times(net, res.flows, capacities, bpr);
        res.beckmann.push_back(beckmann_objective(net, res.flows, capacities, bpr));
    }
    res.tstt = total_travel_time(res.flows, res.times);
    return res;
}

double conservation_residual(const Network& net, const DemandTable& demand, std::span<const double> flows)
{
    const auto n = static_cast<std::size_t>(net.zone_count()) + 1;
    std::vector<double> balance(n, 0.0);
    const auto links = net.links();
    for (std::size_t i = 0; i < links.size(); ++i) {
        balance[static_cast<std::size_t>(links[i].to)] += flows[i];
        balance[static_cast<std::size_t>(links[i].from)] -= flows[i];
    }
    double worst = 0.0;
    for (int z = 1; z <= net.zone_count(); ++z) {
        double originating = 0.0;
        double terminating = 0.0;
        for (int s = 1; s <= net.zone_count(); ++s) {
            originating += demand.at(z, s);
            terminating += demand.at(s, z);
        }
        worst = std::max(worst, std::abs(balance[static_cast<std::size_t>(z)] + originating - terminating));
    }
    return worst;
}

std::string format_flows(const AssignmentResult& r)
{
    std::ostringstream os;
    os << "link_id flow time\n" << std::setprecision(10);
    for (std::size_t i = 0; i < r.flows.size(); ++i)
        os << i + 1 << ' ' << r.flows[i] << ' ' << r.times[i] << "\n";
    return os.str();
}

}  // namespace eqr
