#include "eqrestore/network.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

using namespace eqr;

namespace {

std::string data_path(const char* name)
{
    return std::string(EQR_DATA_DIR) + "/" + name;
}

// Minimal scenario text for the 24-zone network: every zone Average unless overridden.
std::string scenario_text(const std::string& head, const std::map<int, std::string>& classes = {})
{
    std::ostringstream s;
    s << head << "\nincomes:\n";
    for (int z = 1; z <= 24; ++z) {
        auto it = classes.find(z);
        s << "  " << z << ": " << (it == classes.end() ? "average" : it->second) << "\n";
    }
    return s.str();
}

template <class Fn>
std::string error_of(Fn&& fn)
{
    try {
        fn();
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(ParseNetwork, SingleRow)
{
    const Network net = parse_network("1 2 6.02 3.60\n2 1 6.02 3.60\n");
    ASSERT_EQ(net.link_count(), 2u);
    const Link& l = net.link(1);
    EXPECT_EQ(l.from, 1);
    EXPECT_EQ(l.to, 2);
    EXPECT_DOUBLE_EQ(l.capacity, 6.02);
    EXPECT_DOUBLE_EQ(l.free_flow_time, 3.60);
}

TEST(ParseNetwork, EmptyBody)
{
    EXPECT_NE(error_of([] { parse_network(""); }).find("no links"), std::string::npos);
    EXPECT_NE(error_of([] { parse_network("# only a comment\n"); }).find("no links"), std::string::npos);
}

TEST(ParseNetwork, NegativeCapacityNamesLine)
{
    try {
        parse_network("1 2 6.02 3.6\n2 1 -1 3.6\n");
        FAIL() << "accepted a negative capacity";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("non-positive capacity"), std::string::npos);
        EXPECT_EQ(e.line(), 2);
    }
}

TEST(ParseNetwork, RejectsParallelLinksUnlessAllowed)
{
    const std::string text = "1 2 1 1\n1 2 1 1\n";
    EXPECT_THROW(parse_network(text), InputError);
    EXPECT_EQ(parse_network(text, true).link_count(), 2u);
}

TEST(ParseNetwork, MalformedRow)
{
    EXPECT_NE(error_of([] { parse_network("1 2 abc 1\n"); }).find("malformed"), std::string::npos);
}

TEST(SiouxFalls, TableTwoValues)
{
    const Network net = builtin_sioux_falls();
    EXPECT_EQ(net.link_count(), 76u);
    EXPECT_EQ(net.zone_count(), 24);
    EXPECT_DOUBLE_EQ(net.link(38).free_flow_time, 1.80);
    EXPECT_DOUBLE_EQ(net.link(38).capacity, 51.80);
    EXPECT_DOUBLE_EQ(net.link(57).free_flow_time, 2.40);
    EXPECT_DOUBLE_EQ(net.link(57).capacity, 4.42);
    EXPECT_DOUBLE_EQ(net.link(76).capacity, 10.16);
    // Column sums of the published table.
    EXPECT_NEAR(net.total_capacity(), 1320.98, 1e-9);
    double t0 = 0.0;
    for (const Link& l : net.links())
        t0 += l.free_flow_time;
    EXPECT_NEAR(t0, 182.8, 1e-9);
}

TEST(SiouxFalls, RoundTripsThroughText)
{
    const Network net = builtin_sioux_falls();
    EXPECT_EQ(parse_network(serialize_network(net)), net);
}

TEST(SiouxFalls, ShippedFilesMatchBuiltins)
{
    const Network net = parse_network(read_file(data_path("SiouxFalls_net.tntp")));
    EXPECT_EQ(net, builtin_sioux_falls());

    const DemandTable trips = parse_trips(read_file(data_path("SiouxFalls_trips.tntp")), net.zone_count());
    const DemandTable builtin = default_sioux_falls_demand();
    for (int r = 1; r <= 24; ++r)
        for (int s = 1; s <= 24; ++s)
            EXPECT_DOUBLE_EQ(trips.at(r, s), builtin.at(r, s)) << r << "->" << s;

    const Scenario sc = load_scenario(read_file(data_path("SiouxFalls_scenario.yaml")), net);
    const Scenario def = default_sioux_falls_scenario();
    ASSERT_EQ(sc.damaged.size(), def.damaged.size());
    for (std::size_t i = 0; i < sc.damaged.size(); ++i) {
        EXPECT_EQ(sc.damaged[i].link, def.damaged[i].link);
        EXPECT_DOUBLE_EQ(sc.damaged[i].residual, def.damaged[i].residual);
    }
    EXPECT_EQ(sc.incomes, def.incomes);
    EXPECT_DOUBLE_EQ(sc.budget, def.budget);
    EXPECT_DOUBLE_EQ(sc.mu, def.mu);
}

TEST(SiouxFalls, SyntheticDemandIsSymmetricAndPositive)
{
    const DemandTable d = default_sioux_falls_demand();
    for (int r = 1; r <= 24; ++r) {
        EXPECT_EQ(d.at(r, r), 0.0);
        for (int s = 1; s <= 24; ++s) {
            EXPECT_DOUBLE_EQ(d.at(r, s), d.at(s, r));
            if (r != s)
                EXPECT_GT(d.at(r, s), 0.0);
        }
    }
}

TEST(ParseTrips, Basics)
{
    const DemandTable d = parse_trips("Origin 1\n 2 : 100.0;\n", 2);
    EXPECT_DOUBLE_EQ(d.at(1, 2), 100.0);
    EXPECT_DOUBLE_EQ(d.at(2, 1), 0.0);

    const DemandTable empty = parse_trips("", 3);
    EXPECT_EQ(empty.total(), 0.0);

    EXPECT_NE(error_of([] { parse_trips("Origin 1\n 1 : 5;\n", 2); }).find("self-demand must be zero"),
              std::string::npos);
    EXPECT_NO_THROW(parse_trips("Origin 1\n 1 : 0;\n", 2));
    EXPECT_THROW(parse_trips("Origin 1\n 3 : 1;\n", 2), InputError);
}

TEST(ParseTrips, RoundTrip)
{
    const DemandTable d = default_sioux_falls_demand();
    const DemandTable back = parse_trips(serialize_trips(d), 24);
    for (int r = 1; r <= 24; ++r)
        for (int s = 1; s <= 24; ++s)
            EXPECT_DOUBLE_EQ(back.at(r, s), d.at(r, s));
}

TEST(Scenario, DefaultDamageSet)
{
    const Scenario sc = default_sioux_falls_scenario();
    const std::vector<int> expected{1, 7, 11, 12, 17, 21, 25, 48, 30, 10, 32, 36, 40,
                                    35, 38, 39, 44, 43, 67, 47, 45, 59, 56, 64, 66};
    std::vector<int> ids;
    for (const DamagedLink& d : sc.damaged)
        ids.push_back(d.link);
    EXPECT_EQ(ids, expected);
    EXPECT_DOUBLE_EQ(sc.mu, 0.2);
    EXPECT_DOUBLE_EQ(sc.budget, 75.0);

    // Residual = capacity - max recovery; link 38 is fully destroyed.
    for (const DamagedLink& d : sc.damaged)
        if (d.link == 38)
            EXPECT_DOUBLE_EQ(d.residual, 0.0);
}

TEST(Scenario, MaxRecoveryColumnSum)
{
    double sum = 0.0;
    for (const auto& [link, max] : sioux_falls_max_recovery())
        sum += max;
    EXPECT_NEAR(sum, 388.09, 1e-9);

    // Link 10's listed maximum (9.82) exceeds its capacity (9.04), so headroom is capped.
    const Network net = builtin_sioux_falls();
    const auto head = default_sioux_falls_scenario().headroom(net);
    EXPECT_NEAR(std::accumulate(head.begin(), head.end(), 0.0), 388.09 - 9.82 + 9.04, 1e-9);
}

TEST(Scenario, LoadAndDefaults)
{
    const Network net = builtin_sioux_falls();
    const Scenario sc = load_scenario(scenario_text("budget: 10\ndamaged:\n  - {link: 38, max_recovery: 51.80}"), net);
    ASSERT_EQ(sc.damaged.size(), 1u);
    EXPECT_EQ(sc.damaged[0].link, 38);
    EXPECT_DOUBLE_EQ(sc.damaged[0].residual, 0.0);
    EXPECT_DOUBLE_EQ(sc.mu, 0.2);
    EXPECT_DOUBLE_EQ(sc.bpr_alpha, 0.15);
    EXPECT_DOUBLE_EQ(sc.bpr_beta, 4.0);
    EXPECT_DOUBLE_EQ(sc.income(3), 1.0);
}

TEST(Scenario, LoadErrors)
{
    const Network net = builtin_sioux_falls();
    EXPECT_NE(error_of([&] { load_scenario(scenario_text("damaged: []"), net); }).find("budget"), std::string::npos);
    EXPECT_NE(error_of([&] { load_scenario(scenario_text("budget: 1\ndamaged:\n  - {link: 99, residual: 0}"), net); })
                  .find("unknown link id 99"),
              std::string::npos);
    EXPECT_NE(error_of([&] {
                  load_scenario(scenario_text("budget: 1\ndamaged:\n  - {link: 1, residual: 0}\n  - {link: 1, residual: 0}"),
                                net);
              }).find("twice"),
              std::string::npos);
    EXPECT_NE(error_of([&] { load_scenario("budget: 1\ndamaged: []\nincomes:\n  1: low\n", net); }).find("income missing"),
              std::string::npos);
}

TEST(Scenario, SerializeRoundTrip)
{
    const Network net = builtin_sioux_falls();
    Scenario sc = default_sioux_falls_scenario(150.0);
    sc.mu = 0.35;
    const Scenario back = load_scenario(serialize_scenario(sc), net);
    EXPECT_DOUBLE_EQ(back.budget, 150.0);
    EXPECT_DOUBLE_EQ(back.mu, 0.35);
    EXPECT_EQ(back.incomes, sc.incomes);
    ASSERT_EQ(back.damaged.size(), sc.damaged.size());
    for (std::size_t i = 0; i < sc.damaged.size(); ++i)
        EXPECT_DOUBLE_EQ(back.damaged[i].residual, sc.damaged[i].residual);
}

TEST(Classification, LowerEndpointWins)
{
    const Network net = parse_network("1 2 1 1\n2 1 1 1\n2 3 1 1\n3 2 1 1\n");
    Scenario sc;
    sc.incomes = {0.6, 1.5, 1.5};
    sc.damaged = {{1, 0.0}, {3, 0.0}};
    const auto cls = classify_links_by_income(net, sc);
    EXPECT_EQ(cls.at(1), IncomeClass::Low);
    EXPECT_EQ(cls.at(3), IncomeClass::High);

    sc.incomes = {1.0, 1.0, 1.0};
    for (const auto& [link, c] : classify_links_by_income(net, sc))
        EXPECT_EQ(c, IncomeClass::Average) << link;
}

TEST(Classification, NearestLevel)
{
    const IncomeLevels lv;
    EXPECT_EQ(lv.classify(0.6), IncomeClass::Low);
    EXPECT_EQ(lv.classify(0.75), IncomeClass::Low);
    EXPECT_EQ(lv.classify(0.85), IncomeClass::Average);
    const IncomeLevels unit{1.0, 2.0, 3.0};
    EXPECT_EQ(unit.classify(1.5), IncomeClass::Low);  // exact midpoint goes down
    EXPECT_EQ(lv.classify(1.6), IncomeClass::High);
}

TEST(Classification, DefaultScenarioUsesAllClasses)
{
    const auto cls = classify_links_by_income(builtin_sioux_falls(), default_sioux_falls_scenario());
    EXPECT_EQ(cls.size(), 25u);
    std::set<IncomeClass> seen;
    for (const auto& [link, c] : cls)
        seen.insert(c);
    EXPECT_EQ(seen.size(), 3u);
}

TEST(Validate, IntactNetworkIsClean)
{
    const Network net = builtin_sioux_falls();
    Scenario sc = default_sioux_falls_scenario();
    sc.damaged.clear();
    const ValidationReport rep = validate(net, default_sioux_falls_demand(), sc);
    EXPECT_TRUE(rep.ok());
    EXPECT_TRUE(rep.warnings.empty());
}

TEST(Validate, DamageCutsOdPairs)
{
    const Network net = builtin_sioux_falls();
    const ValidationReport rep = validate(net, default_sioux_falls_demand(), default_sioux_falls_scenario());
    EXPECT_TRUE(rep.ok());
    ASSERT_FALSE(rep.warnings.empty());
    EXPECT_TRUE(std::any_of(rep.warnings.begin(), rep.warnings.end(),
                            [](const std::string& w) { return w.find("OD (12,1) unreachable") != std::string::npos; }));
}

TEST(Validate, MuOutOfRange)
{
    const Network net = builtin_sioux_falls();
    Scenario sc = default_sioux_falls_scenario();
    sc.mu = 1.3;
    const ValidationReport rep = validate(net, default_sioux_falls_demand(), sc);
    EXPECT_FALSE(rep.ok());
    EXPECT_NE(std::find(rep.errors.begin(), rep.errors.end(), "mu out of range"), rep.errors.end());
}

TEST(Validate, DisconnectedBaseNetworkIsAnError)
{
    const Network net = parse_network("1 2 1 1\n2 1 1 1\n3 1 1 1\n");
    DemandTable d(3);
    d.set(1, 3, 1.0);
    Scenario sc;
    sc.incomes = {1.0, 1.0, 1.0};
    const ValidationReport rep = validate(net, d, sc);
    EXPECT_FALSE(rep.ok());
    EXPECT_NE(rep.errors.front().find("OD (1,3) unreachable"), std::string::npos);
}

TEST(Reachability, RespectsCapacityFloor)
{
    // Ring 1 -> 2 -> 3 -> 1; flooring link 2 cuts zone 3 off from zone 1.
    const Network net = parse_network("1 2 1 1\n2 3 1 1\n3 1 1 1\n");
    const std::vector<double> caps{1.0, kCapacityEpsilon, 1.0};
    const auto cut = reachable_from(net, caps, 1);
    EXPECT_TRUE(cut[1]);
    EXPECT_TRUE(cut[2]);
    EXPECT_FALSE(cut[3]);
    const auto full = reachable_from(net, net.capacities(), 1);
    EXPECT_TRUE(full[3]);
}
