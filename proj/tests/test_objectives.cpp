#include "eqrestore/objectives.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace eqr;

namespace {

// Direct double-sum Gini, independent of the sorted formula in the library.
double naive_gini(const std::vector<double>& v)
{
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double s = 0.0;
    for (double a : v)
        for (double b : v)
            s += std::abs(a - b);
    return s / (2.0 * n * n * mean);
}

// Zones 1 (Low), 2 (Average), 3 (High); link 1 joins zones 1 and 2 and is the only damaged one.
struct Toy {
    Network net{3, {{1, 1, 2, 4.0, 1.0}, {2, 2, 1, 4.0, 1.0}, {3, 2, 3, 4.0, 1.0}, {4, 3, 2, 4.0, 1.0}}};
    Scenario sc;
    std::vector<double> flows{1.0, 1.0, 1.0, 1.0};

    Toy()
    {
        sc.incomes = {0.6, 1.0, 1.5};
        sc.damaged = {{1, 0.0}};
        sc.budget = 4.0;
    }

    RestorationPlan plan(double r) const { return RestorationPlan{{1}, {r}}; }
};

}  // namespace

TEST(DeficiencyFull, Examples)
{
    EXPECT_EQ(deficiency_full(100.0, 100.0), 0.0);
    EXPECT_DOUBLE_EQ(deficiency_full(100.0, 150.0), 0.5);
    EXPECT_EQ(deficiency_full(100.0, 90.0), 0.0);
    EXPECT_THROW(deficiency_full(0.0, 1.0), std::invalid_argument);
}

TEST(DeficiencySurrogate, Examples)
{
    const BprParams p{0.15, 4.0};
    const std::vector<double> x{1.0}, c{1.0}, t0{1.0};
    EXPECT_EQ(deficiency_surrogate(x, c, c, t0, p), 0.0);

    const std::vector<double> half{0.5};
    const double num = 0.15 * (16.0 - 1.0);
    const double den = 1.15;
    EXPECT_NEAR(deficiency_surrogate(x, c, half, t0, p), num / den, 1e-12);
    EXPECT_NEAR(num / den, 1.9565, 1e-4);
}

TEST(DeficiencySurrogate, UniformFreeFlowScaleCancels)
{
    const BprParams p{0.15, 4.0};
    const std::vector<double> x{1.0, 2.0, 0.5}, pre{1.0, 3.0, 2.0}, post{0.7, 2.0, 2.0};
    const std::vector<double> t0{1.0, 2.0, 3.0}, t0x2{2.0, 4.0, 6.0};
    EXPECT_NEAR(deficiency_surrogate(x, pre, post, t0, p), deficiency_surrogate(x, pre, post, t0x2, p), 1e-14);
}

TEST(DeficiencySurrogate, Errors)
{
    const std::vector<double> x{1.0}, c{1.0}, t0{1.0}, zero{0.0}, none{0.0};
    EXPECT_THROW(deficiency_surrogate(x, c, zero, t0, {}), std::invalid_argument);
    EXPECT_THROW(deficiency_surrogate(none, c, c, t0, {}), std::invalid_argument);
}

TEST(Gini, Examples)
{
    EXPECT_EQ(gini(std::vector<double>{2.0, 2.0, 2.0}), 0.0);
    EXPECT_NEAR(gini(std::vector<double>{0.6, 1.5}), 1.8 / (2.0 * 4.0 * 1.05), 1e-15);
    EXPECT_NEAR(gini(std::vector<double>{0.6, 1.5}), 0.214286, 1e-6);
    EXPECT_NEAR(gini(std::vector<double>{0.6, 1.0, 1.5}), 3.6 / (2.0 * 9.0 * (3.1 / 3.0)), 1e-15);
    EXPECT_NEAR(gini(std::vector<double>{0.6, 1.0, 1.5}), 0.193548, 1e-6);
    EXPECT_THROW(gini(std::vector<double>{0.0, 0.0}), std::invalid_argument);
}

TEST(Gini, MatchesDoubleSumAndInvariances)
{
    const std::vector<double> v{0.3, 1.7, 0.9, 0.9, 2.4, 0.05, 1.1};
    const double g = gini(v);
    EXPECT_NEAR(g, naive_gini(v), 1e-14);
    EXPECT_GE(g, 0.0);
    EXPECT_LT(g, 1.0);
    for (double k : {0.5, 2.0, 10.0}) {
        std::vector<double> s = v;
        for (double& x : s)
            x *= k;
        EXPECT_NEAR(gini(s), g, 1e-14) << k;
    }
    std::vector<double> perm{2.4, 0.9, 0.05, 1.7, 1.1, 0.3, 0.9};
    EXPECT_NEAR(gini(perm), g, 1e-15);
}

TEST(Gini, ExplicitMean)
{
    const std::vector<double> v{1.0, 3.0};
    EXPECT_NEAR(gini(v, 4.0), 4.0 / (2.0 * 4.0 * 4.0), 1e-15);
}

TEST(EquityLiteral, Properties)
{
    Scenario sc;
    sc.incomes.assign(24, 1.0);
    EXPECT_EQ(equity_literal(sc), 0.0);

    const Scenario def = default_sioux_falls_scenario();
    const double g = equity_literal(def);
    EXPECT_NEAR(g, naive_gini(def.incomes), 1e-14);
    EXPECT_NEAR(g, 0.197873, 1e-6);  // frozen value for the shipped income map

    Scenario scaled = def;
    for (double& i : scaled.incomes)
        i *= 3.0;
    EXPECT_NEAR(equity_literal(scaled), g, 1e-14);
}

TEST(EquityQuadratic, Examples)
{
    Scenario sc;
    sc.incomes = {1.0, 1.0};
    EXPECT_EQ(equity_quadratic(sc), 0.0);
    sc.incomes = {0.6, 1.5};
    EXPECT_NEAR(equity_quadratic(sc), (2.0 * 0.81) / (2.0 * 4.0 * 1.05), 1e-15);
    EXPECT_NEAR(equity_quadratic(sc), 0.192857, 1e-6);
    EXPECT_NEAR(equity_quadratic(sc, 2.0), 0.192857 / 2.0, 1e-6);
}

TEST(EquityQuadratic, OrderingAgreesWithLiteralOnTwoPoints)
{
    // Mean-preserving spreads {1 - d, 1 + d}: both measures increase with d,
    // and the squared form grows at least as fast relative to its start.
    double prev_lit = -1.0, prev_quad = -1.0;
    double base_lit = 0.0, base_quad = 0.0;
    for (int k = 1; k < 19; ++k) {
        const double d = 0.05 * k;
        Scenario sc;
        sc.incomes = {1.0 - d, 1.0 + d};
        const double lit = equity_literal(sc);
        const double quad = equity_quadratic(sc);
        if (k == 1) {
            base_lit = lit;
            base_quad = quad;
        }
        EXPECT_GT(lit, prev_lit);
        EXPECT_GT(quad, prev_quad);
        EXPECT_GE(quad / base_quad + 1e-9, lit / base_lit);
        prev_lit = lit;
        prev_quad = quad;
    }
}

TEST(EquityResponsive, FullRestorationEqualsLiteral)
{
    const Network net = builtin_sioux_falls();
    const Scenario sc = default_sioux_falls_scenario();
    RestorationPlan plan;
    const auto head = sc.headroom(net);
    for (std::size_t i = 0; i < sc.damaged.size(); ++i) {
        plan.links.push_back(sc.damaged[i].link);
        plan.recovery.push_back(head[i]);
    }
    EXPECT_NEAR(equity_responsive(plan, sc, net), equity_literal(sc), 1e-14);
}

TEST(EquityResponsive, ZeroRestorationByHand)
{
    const Toy t;
    // rho = 0 on zones 1 and 2; zone 3 has no damaged link.
    EXPECT_NEAR(equity_responsive(t.plan(0.0), t.sc, t.net), naive_gini({0.0, 0.0, 1.5}), 1e-15);
    EXPECT_NEAR(equity_responsive(t.plan(2.0), t.sc, t.net), naive_gini({0.3, 0.5, 1.5}), 1e-15);
}

TEST(EquityResponsive, RestoringTheLowZoneLowersE)
{
    const Toy t;
    double prev = equity_responsive(t.plan(0.0), t.sc, t.net);
    for (int k = 1; k <= 20; ++k) {
        const double e = equity_responsive(t.plan(4.0 * k / 20.0), t.sc, t.net);
        EXPECT_LT(e, prev) << k;
        prev = e;
    }
}

TEST(Resilience, Examples)
{
    EXPECT_EQ(resilience(0.5, 0.3, 1.0), 0.5);
    EXPECT_EQ(resilience(0.5, 0.3, 0.0), 0.3);
    EXPECT_NEAR(resilience(0.5, 0.3, 0.2), 0.34, 1e-15);
    EXPECT_THROW(resilience(0.5, 0.3, 1.3), std::invalid_argument);
    EXPECT_THROW(resilience(0.5, 0.3, -0.1), std::invalid_argument);
    EXPECT_EQ(resilience(INFINITY, 0.3, 0.0), 0.3);
}

TEST(Resilience, JointScalingKeepsRanking)
{
    const double mu = 0.3;
    const double a = resilience(0.2, 0.5, mu);
    const double b = resilience(0.4, 0.35, mu);
    for (double k : {0.1, 3.0, 50.0})
        EXPECT_EQ(a < b, resilience(0.2 * k, 0.5 * k, mu) < resilience(0.4 * k, 0.35 * k, mu));
}

TEST(Hamiltonian, PenaltiesVanishOnFeasiblePlans)
{
    Toy t;
    t.sc.mu = 0.4;
    const ObjectiveBreakdown b = hamiltonian(t.plan(4.0), t.sc, t.net, t.flows);
    EXPECT_EQ(b.budget_penalty, 0.0);
    EXPECT_EQ(b.capacity_penalty, 0.0);
    EXPECT_EQ(b.H, b.R);
    EXPECT_EQ(b.R, resilience(b.D, b.E, 0.4));
    EXPECT_EQ(b.D, 0.0);
}

TEST(Hamiltonian, BudgetPenalty)
{
    Toy t;
    t.sc.lambda1 = 10.0;
    t.sc.budget = 2.0;
    {
        const ObjectiveBreakdown b = hamiltonian(t.plan(3.0), t.sc, t.net, t.flows);
        EXPECT_DOUBLE_EQ(b.budget_penalty, 10.0);
    }
    // Underspending is penalized only in equality mode.
    const ObjectiveBreakdown eq = hamiltonian(t.plan(1.0), t.sc, t.net, t.flows, {EquityMode::Responsive, PenaltyMode::Equality});
    const ObjectiveBreakdown one = hamiltonian(t.plan(1.0), t.sc, t.net, t.flows, {EquityMode::Responsive, PenaltyMode::OneSided});
    EXPECT_DOUBLE_EQ(eq.budget_penalty, 10.0);
    EXPECT_EQ(one.budget_penalty, 0.0);
}

TEST(Hamiltonian, CapacityPenalty)
{
    Toy t;
    t.sc.lambda2 = 5.0;
    t.sc.budget = 6.0;
    const ObjectiveBreakdown b = hamiltonian(t.plan(6.0), t.sc, t.net, t.flows);
    EXPECT_DOUBLE_EQ(b.capacity_penalty, 20.0);
    EXPECT_EQ(b.budget_penalty, 0.0);
    EXPECT_DOUBLE_EQ(b.H, b.R + 20.0);
}

TEST(Hamiltonian, TermsAddUp)
{
    const Toy t;
    const ObjectiveBreakdown b = hamiltonian(t.plan(1.0), t.sc, t.net, t.flows);
    // Surrogate deficiency of link 1 at capacity 1 against 4, by hand.
    const double num = 0.15 * 1.0 * 1.0 * (1.0 - std::pow(0.25, 4));
    const double den = 4.0 * (1.0 + 0.15 * std::pow(0.25, 4));
    EXPECT_NEAR(b.D, num / den, 1e-14);
    EXPECT_NEAR(b.E, naive_gini({0.15, 0.25, 1.5}), 1e-15);
    EXPECT_NEAR(b.R, 0.2 * b.D + 0.8 * b.E, 1e-15);
    EXPECT_NEAR(b.budget_penalty, 1e3 * 9.0, 1e-9);
    EXPECT_EQ(b.H, b.R + b.budget_penalty + b.capacity_penalty);
}

TEST(Hamiltonian, EquityModes)
{
    const Toy t;
    const auto lit = hamiltonian(t.plan(1.0), t.sc, t.net, t.flows, {EquityMode::Literal});
    const auto quad = hamiltonian(t.plan(1.0), t.sc, t.net, t.flows, {EquityMode::Quadratic});
    EXPECT_DOUBLE_EQ(lit.E, equity_literal(t.sc));
    EXPECT_DOUBLE_EQ(quad.E, equity_quadratic(t.sc));
}

TEST(Hamiltonian, UnrestoredFlowLinkIsLargeButFinite)
{
    const Toy t;
    const ObjectiveBreakdown b = hamiltonian(t.plan(0.0), t.sc, t.net, t.flows);
    EXPECT_TRUE(std::isfinite(b.D));
    EXPECT_GT(b.D, 1e6);
}

TEST(Hamiltonian, MismatchedPlan)
{
    const Toy t;
    EXPECT_THROW(hamiltonian(RestorationPlan{{2}, {1.0}}, t.sc, t.net, t.flows), std::invalid_argument);
    EXPECT_THROW(hamiltonian(RestorationPlan{{}, {}}, t.sc, t.net, t.flows), std::invalid_argument);
}

TEST(Modes, Parse)
{
    EXPECT_EQ(parse_equity_mode("quadratic"), EquityMode::Quadratic);
    EXPECT_EQ(parse_penalty_mode("one-sided"), PenaltyMode::OneSided);
    EXPECT_FALSE(parse_equity_mode("fair").has_value());
    EXPECT_EQ(to_string(PenaltyMode::Equality), "equality");
}

TEST(Breakdown, FlatRecord)
{
    ObjectiveBreakdown b{0.1, 0.2, 0.18, 0.0, 0.0, 0.18};
    EXPECT_EQ(format_breakdown(b), "D=0.1 E=0.2 R=0.18 budget_penalty=0 capacity_penalty=0 H=0.18");
}
