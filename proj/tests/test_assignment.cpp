#include "eqrestore/assignment.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace eqr;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Network two_parallel(double cap = 2.0, double t0 = 1.0)
{
    return Network(2, {{1, 1, 2, cap, t0}, {2, 1, 2, cap, t0}, {3, 2, 1, cap, t0}}, true);
}

// 1 -> {2, 3} -> 4 plus return links so every zone is connected.
Network diamond(double cap = 1.0)
{
    return Network(4, {{1, 1, 2, cap, 1.0},
                       {2, 1, 3, cap, 1.0},
                       {3, 2, 4, cap, 1.0},
                       {4, 3, 4, cap, 1.0},
                       {5, 4, 1, cap, 5.0}});
}

}  // namespace

TEST(Bpr, HandValues)
{
    const BprParams p{0.15, 4.0};
    EXPECT_DOUBLE_EQ(bpr_time(2.4, 0.0, 10.0, p), 2.4);
    EXPECT_NEAR(bpr_time(2.4, 10.0, 10.0, p), 2.4 * 1.15, 1e-12);
    EXPECT_NEAR(bpr_time(1.0, 2.0, 1.0, p), 1.0 + 0.15 * 16.0, 1e-12);
    EXPECT_DOUBLE_EQ(bpr_integral(1.0, 0.0, 1.0, p), 0.0);
    EXPECT_NEAR(bpr_integral(1.0, 1.0, 1.0, p), 1.0 + 0.15 / 5.0, 1e-12);
}

TEST(Bpr, RejectsTinyCapacity)
{
    EXPECT_THROW(bpr_time(1.0, 1.0, kCapacityEpsilon, {}), std::domain_error);
    EXPECT_THROW(bpr_integral(1.0, 1.0, 0.0, {}), std::domain_error);
}

TEST(Bpr, StrictlyIncreasing)
{
    double prev = bpr_time(3.0, 0.0, 5.0, {});
    for (int i = 1; i <= 50; ++i) {
        const double t = bpr_time(3.0, 0.2 * i, 5.0, {});
        EXPECT_GT(t, prev);
        prev = t;
    }
}

TEST(Bpr, IntegralDerivativeMatchesTime)
{
    const BprParams p{0.15, 4.0};
    const double h = 1e-5;
    struct Fixture {
        double t0;
        double cap;
    };
    for (const Fixture f : {Fixture{1.0, 1.0}, Fixture{2.4, 10.0}, Fixture{6.0, 4.42}, Fixture{1.2, 51.8}}) {
        for (int i = 0; i < 100; ++i) {
            const double x = h + 3.0 * f.cap * i / 99.0;
            const double fd = (bpr_integral(f.t0, x + h, f.cap, p) - bpr_integral(f.t0, x - h, f.cap, p)) / (2.0 * h);
            const double exact = bpr_time(f.t0, x, f.cap, p);
            EXPECT_LE(std::abs(fd - exact) / exact, 1e-6) << "t0=" << f.t0 << " c=" << f.cap << " x=" << x;
        }
    }
}

TEST(ShortestPath, Basics)
{
    const Network chain(3, {{1, 1, 2, 1, 1}, {2, 2, 3, 1, 2}});
    const std::vector<double> times{1.0, 2.0};
    const ShortestPathTree t = shortest_path_tree(chain, times, 1);
    EXPECT_DOUBLE_EQ(t.distance[3], 3.0);
    EXPECT_EQ(t.pred_link[3], 1);

    const ShortestPathTree sink = shortest_path_tree(chain, times, 3);
    EXPECT_EQ(sink.distance[1], kInf);
    EXPECT_EQ(sink.distance[2], kInf);
    EXPECT_DOUBLE_EQ(sink.distance[3], 0.0);
}

TEST(ShortestPath, SiouxFallsFreeFlowReachesAll)
{
    const Network net = builtin_sioux_falls();
    std::vector<double> t0;
    for (const Link& l : net.links())
        t0.push_back(l.free_flow_time);
    const ShortestPathTree t = shortest_path_tree(net, t0, 1);
    for (int z = 1; z <= 24; ++z)
        EXPECT_LT(t.distance[static_cast<std::size_t>(z)], kInf) << z;
}

TEST(AllOrNothing, Basics)
{
    const Network net = diamond();
    const std::vector<double> times(5, 1.0);
    DemandTable none(4);
    for (double f : all_or_nothing(net, times, none))
        EXPECT_EQ(f, 0.0);

    DemandTable d(4);
    d.set(1, 4, 3.0);
    const auto flows = all_or_nothing(net, times, d);
    // Equal-cost routes: the lowest link ids win.
    EXPECT_DOUBLE_EQ(flows[0], 3.0);
    EXPECT_DOUBLE_EQ(flows[1], 0.0);
    EXPECT_DOUBLE_EQ(flows[2], 3.0);
    EXPECT_DOUBLE_EQ(flows[3], 0.0);
    EXPECT_DOUBLE_EQ(conservation_residual(net, d, flows), 0.0);
}

TEST(AllOrNothing, UnreachableThrows)
{
    const Network net(3, {{1, 1, 2, 1, 1}, {2, 2, 1, 1, 1}, {3, 3, 1, 1, 1}});
    std::vector<double> times{1.0, 1.0, 1.0};
    DemandTable d(3);
    d.set(1, 3, 1.0);
    try {
        all_or_nothing(net, times, d);
        FAIL();
    } catch (const UnreachableError& e) {
        EXPECT_EQ(e.origin(), 1);
        EXPECT_EQ(e.destination(), 3);
        EXPECT_STREQ(e.what(), "OD (1,3) unreachable");
    }
}

TEST(SolveUe, ZeroDemand)
{
    const Network net = diamond();
    const AssignmentResult r = solve_ue(net, DemandTable(4), net.capacities());
    EXPECT_EQ(r.tstt, 0.0);
    EXPECT_EQ(r.relative_gap, 0.0);
    EXPECT_TRUE(r.converged);
    for (double f : r.flows)
        EXPECT_EQ(f, 0.0);
}

TEST(SolveUe, SinglePathIsExactInOneIteration)
{
    const Network net(3, {{1, 1, 2, 1, 1}, {2, 2, 3, 1, 2}, {3, 3, 1, 1, 1}});
    DemandTable d(3);
    d.set(1, 3, 0.7);
    const AssignmentResult r = solve_ue(net, d, net.capacities());
    EXPECT_EQ(r.iterations, 1);
    EXPECT_TRUE(r.converged);
    EXPECT_DOUBLE_EQ(r.flows[0], 0.7);
    EXPECT_DOUBLE_EQ(r.flows[1], 0.7);
    EXPECT_DOUBLE_EQ(r.flows[2], 0.0);
}

TEST(SolveUe, SymmetricParallelLinksSplitEvenly)
{
    const Network net = two_parallel();
    for (double demand : {0.5, 2.0, 7.0}) {
        DemandTable d(2);
        d.set(1, 2, demand);
        const AssignmentResult r = solve_ue(net, d, net.capacities());
        EXPECT_TRUE(r.converged);
        EXPECT_LE(std::abs(r.flows[0] - demand / 2) / (demand / 2), 1e-4);
        EXPECT_LE(std::abs(r.flows[1] - demand / 2) / (demand / 2), 1e-4);
    }
}

TEST(SolveUe, AsymmetricParallelLinksEqualizeTimes)
{
    // Wardrop: both used links end with equal travel times.
    const Network net(2, {{1, 1, 2, 1.0, 1.0}, {2, 1, 2, 2.0, 1.5}, {3, 2, 1, 1.0, 1.0}}, true);
    DemandTable d(2);
    d.set(1, 2, 3.0);
    const AssignmentResult r = solve_ue(net, d, net.capacities(), {500, 1e-8, 1e-10});
    EXPECT_GT(r.flows[0], 0.0);
    EXPECT_GT(r.flows[1], 0.0);
    EXPECT_NEAR(r.times[0], r.times[1], 1e-5 * r.times[0]);
}

TEST(SolveUe, TsttIsDotProduct)
{
    const Network net = diamond();
    DemandTable d(4);
    d.set(1, 4, 2.0);
    d.set(4, 1, 1.0);
    const AssignmentResult r = solve_ue(net, d, net.capacities());
    double dot = 0.0;
    for (std::size_t i = 0; i < r.flows.size(); ++i)
        dot += r.flows[i] * r.times[i];
    EXPECT_EQ(r.tstt, total_travel_time(r));
    EXPECT_NEAR(r.tstt, dot, 1e-12 * dot);
    EXPECT_EQ(total_travel_time(std::vector<double>{100.0}, std::vector<double>{2.0}), 200.0);
    EXPECT_EQ(total_travel_time(std::vector<double>{0.0}, std::vector<double>{kInf}), 0.0);
}

TEST(SolveUe, MoreCapacityNeverHurtsOnFixtures)
{
    const UEParams p;
    for (int which = 0; which < 2; ++which) {
        const Network net = which == 0 ? two_parallel() : diamond();
        DemandTable d(net.zone_count());
        d.set(1, net.zone_count(), 2.5);
        double prev = kInf;
        for (double scale : {0.5, 1.0, 1.5, 3.0}) {
            std::vector<double> caps = net.capacities();
            for (double& c : caps)
                c *= scale;
            const double tstt = solve_ue(net, d, caps, p).tstt;
            EXPECT_LE(tstt, prev * (1.0 + p.gap_tolerance));
            prev = tstt;
        }
    }
}

TEST(SolveUe, RemovedLinksCarryNoFlow)
{
    const Network net = diamond();
    std::vector<double> caps = net.capacities();
    caps[0] = kCapacityEpsilon;
    DemandTable d(4);
    d.set(1, 4, 1.0);
    const AssignmentResult r = solve_ue(net, d, caps);
    EXPECT_EQ(r.flows[0], 0.0);
    EXPECT_EQ(r.times[0], kInf);
    EXPECT_NEAR(r.flows[1], 1.0, 1e-12);

    caps[1] = 0.0;
    EXPECT_THROW(solve_ue(net, d, caps), UnreachableError);
}

TEST(SolveUe, SiouxFallsConverges)
{
    const Network net = builtin_sioux_falls();
    const DemandTable d = default_sioux_falls_demand();
    const AssignmentResult r = solve_ue(net, d, net.capacities());
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.relative_gap, 1e-4);
    EXPECT_LE(r.iterations, 500);
    EXPECT_LE(conservation_residual(net, d, r.flows), 1e-6 * d.total());
    for (double f : r.flows)
        EXPECT_GE(f, 0.0);
    for (std::size_t i = 1; i < r.beckmann.size(); ++i)
        EXPECT_LE(r.beckmann[i], r.beckmann[i - 1] * (1.0 + 1e-12)) << "iteration " << i;
}

TEST(SolveUe, ReportsNonConvergence)
{
    const Network net = builtin_sioux_falls();
    const AssignmentResult r = solve_ue(net, default_sioux_falls_demand(), net.capacities(), {1, 1e-12, 1e-8});
    EXPECT_EQ(r.iterations, 1);
    EXPECT_FALSE(r.converged);
    EXPECT_GT(r.relative_gap, 1e-12);
}

TEST(SolveUe, BeckmannDescentOnDiamond)
{
    const Network net = diamond(0.5);
    DemandTable d(4);
    d.set(1, 4, 4.0);
    const AssignmentResult r = solve_ue(net, d, net.capacities(), {200, 1e-9, 1e-10});
    ASSERT_FALSE(r.beckmann.empty());
    for (std::size_t i = 1; i < r.beckmann.size(); ++i)
        EXPECT_LE(r.beckmann[i], r.beckmann[i - 1] * (1.0 + 1e-12));
    EXPECT_NEAR(r.beckmann.back(), beckmann_objective(net, r.flows, net.capacities(), {}), 1e-12);
}

TEST(FormatFlows, Rows)
{
    AssignmentResult r;
    r.flows = {1.5, 0.0};
    r.times = {2.0, kInf};
    const std::string text = format_flows(r);
    EXPECT_NE(text.find("1 1.5 2"), std::string::npos);
    EXPECT_NE(text.find("2 0 inf"), std::string::npos);
}
