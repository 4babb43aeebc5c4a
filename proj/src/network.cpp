#include "eqrestore/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <utility>

namespace eqr {

InputError::InputError(const std::string& what, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line)
{
}

// Network -----------------------------------------------------------------------

Network::Network(int zone_count, std::vector<Link> links, bool allow_parallel)
    : zone_count_(zone_count), links_(std::move(links))
{
    if (zone_count_ < 1)
        throw InputError("network needs at least one zone");
    if (links_.empty())
        throw InputError("no links");

    std::set<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < links_.size(); ++i) {
        const Link& l = links_[i];
        if (l.id != static_cast<int>(i) + 1)
            throw InputError("link ids must be dense and ordered, got " + std::to_string(l.id) + " at position " +
                             std::to_string(i + 1));
        if (l.from < 1 || l.from > zone_count_ || l.to < 1 || l.to > zone_count_)
            throw InputError("link " + std::to_string(l.id) + " has an endpoint outside 1.." +
                             std::to_string(zone_count_));
        if (l.from == l.to)
            throw InputError("link " + std::to_string(l.id) + " is a self-loop");
        if (!(l.capacity > 0.0) || !std::isfinite(l.capacity))
            throw InputError("link " + std::to_string(l.id) + ": non-positive capacity");
        if (!(l.free_flow_time > 0.0) || !std::isfinite(l.free_flow_time))
            throw InputError("link " + std::to_string(l.id) + ": non-positive free-flow time");
        if (!seen.emplace(l.from, l.to).second && !allow_parallel)
            throw InputError("duplicate link " + std::to_string(l.from) + "->" + std::to_string(l.to) +
                             " (parallel links not permitted)");
    }

    out_offsets_.assign(static_cast<std::size_t>(zone_count_) + 1, 0);
    for (const Link& l : links_)
        ++out_offsets_[static_cast<std::size_t>(l.from)];
    std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
    out_links_.assign(links_.size(), 0);
    std::vector<int> cursor(out_offsets_.begin(), out_offsets_.end() - 1);
    for (std::size_t i = 0; i < links_.size(); ++i)
        out_links_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(links_[i].from - 1)]++)] =
            static_cast<int>(i);
}

const Link& Network::link(int id) const
{
    if (!has_link(id))
        throw InputError("unknown link id " + std::to_string(id));
    return links_[static_cast<std::size_t>(id - 1)];
}

std::span<const int> Network::outgoing(int zone) const
{
    const auto z = static_cast<std::size_t>(zone - 1);
    const auto begin = static_cast<std::size_t>(out_offsets_[z]);
    const auto end = static_cast<std::size_t>(out_offsets_[z + 1]);
    return std::span<const int>(out_links_).subspan(begin, end - begin);
}

double Network::total_capacity() const noexcept
{
    double sum = 0.0;
    for (const Link& l : links_)
        sum += l.capacity;
    return sum;
}

std::vector<double> Network::capacities() const
{
    std::vector<double> caps;
    caps.reserve(links_.size());
    for (const Link& l : links_)
        caps.push_back(l.capacity);
    return caps;
}

// DemandTable -------------------------------------------------------------------

DemandTable::DemandTable(int zone_count)
    : zone_count_(zone_count), values_(static_cast<std::size_t>(zone_count) * static_cast<std::size_t>(zone_count), 0.0)
{
}

double DemandTable::at(int origin, int destination) const
{
    return values_.at(static_cast<std::size_t>(origin - 1) * static_cast<std::size_t>(zone_count_) +
                      static_cast<std::size_t>(destination - 1));
}

void DemandTable::set(int origin, int destination, double value)
{
    if (origin < 1 || origin > zone_count_ || destination < 1 || destination > zone_count_)
        throw InputError("OD pair (" + std::to_string(origin) + "," + std::to_string(destination) + ") out of range");
    if (value < 0.0 || !std::isfinite(value))
        throw InputError("negative demand for (" + std::to_string(origin) + "," + std::to_string(destination) + ")");
    if (origin == destination && value != 0.0)
        throw InputError("self-demand must be zero (zone " + std::to_string(origin) + ")");
    values_[static_cast<std::size_t>(origin - 1) * static_cast<std::size_t>(zone_count_) +
            static_cast<std::size_t>(destination - 1)] = value;
}

double DemandTable::total() const noexcept
{
    return std::accumulate(values_.begin(), values_.end(), 0.0);
}

double DemandTable::origin_total(int origin) const
{
    double sum = 0.0;
    for (int s = 1; s <= zone_count_; ++s)
        sum += at(origin, s);
    return sum;
}

// Incomes -----------------------------------------------------------------------

std::string_view to_string(IncomeClass c)
{
    switch (c) {
    case IncomeClass::Low: return "low";
    case IncomeClass::Average: return "average";
    case IncomeClass::High: return "high";
    }
    return "unknown";
}

double IncomeLevels::value(IncomeClass c) const
{
    switch (c) {
    case IncomeClass::Low: return low;
    case IncomeClass::Average: return average;
    case IncomeClass::High: return high;
    }
    return average;
}

IncomeClass IncomeLevels::classify(double income) const
{
    IncomeClass best = IncomeClass::Low;
    double best_dist = std::abs(income - low);
    for (IncomeClass c : {IncomeClass::Average, IncomeClass::High}) {
        const double d = std::abs(income - value(c));
        if (d < best_dist) {
            best = c;
            best_dist = d;
        }
    }
    return best;
}

std::vector<double> Scenario::residual_capacities(const Network& net) const
{
    std::vector<double> caps = net.capacities();
    for (const DamagedLink& d : damaged)
        caps[static_cast<std::size_t>(d.link - 1)] = d.residual;
    return caps;
}

std::vector<double> Scenario::headroom(const Network& net) const
{
    std::vector<double> h;
    h.reserve(damaged.size());
    for (const DamagedLink& d : damaged)
        h.push_back(net.link(d.link).capacity - d.residual);
    return h;
}

// Built-in Sioux Falls ------------------------------------------------------------

namespace {

struct SiouxFallsRow {
    int from;
    int to;
    double free_flow_time;
    double capacity;
};

// Standard Sioux Falls link ordering; free-flow times (min) and capacities
// (10^3 veh/h) from the published link table.
constexpr std::array<SiouxFallsRow, 76> kSiouxFalls{{
    {1, 2, 3.60, 6.02},    {1, 3, 2.40, 9.01},    {2, 1, 3.60, 12.02},   {2, 6, 3.00, 15.92},
    {3, 1, 2.40, 46.81},   {3, 4, 2.40, 34.22},   {3, 12, 2.40, 46.81},  {4, 3, 2.40, 25.82},
    {4, 5, 1.20, 28.25},   {4, 11, 3.60, 9.04},   {5, 4, 1.20, 46.85},   {5, 6, 2.40, 13.86},
    {5, 9, 3.00, 10.52},   {6, 2, 3.00, 9.92},    {6, 5, 2.40, 9.90},    {6, 8, 1.20, 21.62},
    {7, 8, 1.80, 15.68},   {7, 18, 1.20, 46.81},  {8, 6, 1.20, 9.80},    {8, 7, 1.80, 15.68},
    {8, 9, 2.00, 10.10},   {8, 16, 3.00, 10.09},  {9, 5, 3.00, 20.00},   {9, 8, 2.00, 10.10},
    {9, 10, 1.80, 27.83},  {10, 9, 1.80, 27.83},  {10, 11, 3.00, 20.00}, {10, 15, 3.60, 27.02},
    {10, 16, 3.00, 10.27}, {10, 17, 4.20, 9.99},  {11, 4, 3.60, 9.82},   {11, 10, 3.00, 20.00},
    {11, 12, 3.60, 9.82},  {11, 14, 2.40, 9.75},  {12, 3, 2.40, 46.81},  {12, 11, 3.60, 9.82},
    {12, 13, 1.80, 51.80}, {13, 12, 1.80, 51.80}, {13, 24, 2.40, 10.18}, {14, 11, 2.40, 9.75},
    {14, 15, 3.00, 10.26}, {14, 23, 2.40, 9.85},  {15, 10, 3.60, 27.02}, {15, 14, 3.00, 10.26},
    {15, 19, 2.40, 9.64},  {15, 22, 2.40, 20.63}, {16, 8, 3.00, 10.09},  {16, 10, 3.00, 10.27},
    {16, 17, 1.20, 10.46}, {16, 18, 1.80, 39.36}, {17, 10, 4.20, 9.99},  {17, 16, 1.20, 10.46},
    {17, 19, 1.20, 9.65},  {18, 7, 1.20, 46.81},  {18, 16, 1.80, 39.36}, {18, 20, 2.40, 8.11},
    {19, 15, 2.40, 4.42},  {19, 17, 1.20, 9.65},  {19, 20, 2.40, 10.01}, {20, 18, 2.40, 8.11},
    {20, 19, 2.40, 6.05},  {20, 21, 3.60, 10.12}, {20, 22, 3.00, 10.15}, {21, 20, 3.60, 10.12},
    {21, 22, 1.20, 10.46}, {21, 24, 1.80, 9.77},  {22, 15, 2.40, 20.63}, {22, 20, 3.00, 10.15},
    {22, 21, 1.20, 10.46}, {22, 23, 2.40, 10.00}, {23, 14, 2.40, 9.85},  {23, 22, 2.40, 10.00},
    {23, 24, 1.20, 10.16}, {24, 13, 2.40, 11.38}, {24, 21, 1.80, 9.77},  {24, 23, 1.20, 10.16},
}};

constexpr std::array<std::pair<int, double>, 25> kMaxRecovery{{
    {1, 6.01},   {7, 6.81},   {11, 46.85}, {12, 9.90},  {17, 15.68}, {21, 10.10}, {25, 27.83},
    {48, 10.27}, {30, 9.99},  {10, 9.82},  {32, 20.00}, {36, 9.82},  {40, 9.75},  {35, 46.81},
    {38, 51.80}, {39, 10.18}, {44, 10.26}, {43, 7.02},  {67, 20.63}, {47, 10.09}, {45, 4.42},
    {59, 6.05},  {56, 8.11},  {64, 10.12}, {66, 9.77},
}};

using IC = IncomeClass;
constexpr std::array<IncomeClass, 24> kZoneIncome{{
    IC::High,    IC::High,    IC::High,    IC::High,    IC::High,    IC::High,     // 1-6
    IC::High,    IC::Low,     IC::Average, IC::Low,     IC::Average, IC::Average,  // 7-12
    IC::Average, IC::Average, IC::Low,     IC::Low,     IC::Low,     IC::Low,      // 13-18
    IC::Low,     IC::Low,     IC::Average, IC::Low,     IC::Average, IC::Average,  // 19-24
}};

}  // namespace

Network builtin_sioux_falls()
{
    std::vector<Link> links;
    links.reserve(kSiouxFalls.size());
    int id = 1;
    for (const SiouxFallsRow& r : kSiouxFalls)
        links.push_back(Link{id++, r.from, r.to, r.capacity, r.free_flow_time});
    return Network(24, std::move(links));
}

std::span<const std::pair<int, double>> sioux_falls_max_recovery()
{
    return kMaxRecovery;
}

std::array<IncomeClass, 24> sioux_falls_income_classes()
{
    return kZoneIncome;
}

Scenario default_sioux_falls_scenario(double budget)
{
    const Network net = builtin_sioux_falls();
    Scenario sc;
    sc.budget = budget;
    for (const auto& [link, max_recovery] : kMaxRecovery) {
        // Link 10's table capacity (9.04) is below its listed maximum recovery
        // (9.82); the residual is floored at zero.
        const double residual = std::max(0.0, net.link(link).capacity - max_recovery);
        sc.damaged.push_back(DamagedLink{link, std::round(residual * 1e6) / 1e6});
    }
    for (IncomeClass c : kZoneIncome)
        sc.incomes.push_back(sc.levels.value(c));
    return sc;
}

DemandTable synthetic_symmetric_demand(const Network& net, double scale)
{
    const int n = net.zone_count();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(static_cast<std::size_t>(n * n), inf);
    auto d = [&](int r, int s) -> double& { return dist[static_cast<std::size_t>((r - 1) * n + (s - 1))]; };
    for (int r = 1; r <= n; ++r)
        d(r, r) = 0.0;
    for (const Link& l : net.links())
        d(l.from, l.to) = std::min(d(l.from, l.to), l.free_flow_time);
    for (int k = 1; k <= n; ++k)
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j)
                if (d(i, k) + d(k, j) < d(i, j))
                    d(i, j) = d(i, k) + d(k, j);

    DemandTable demand(n);
    for (int r = 1; r <= n; ++r) {
        for (int s = r + 1; s <= n; ++s) {
            const double sep = 0.5 * (d(r, s) + d(s, r));
            if (!std::isfinite(sep))
                continue;
            // Rounded to 1e-4 so the shipped trips file reproduces exactly.
            const double q = std::round(1e4 * scale / sep) / 1e4;
            demand.set(r, s, q);
            demand.set(s, r, q);
        }
    }
    return demand;
}

DemandTable default_sioux_falls_demand()
{
    return synthetic_symmetric_demand(builtin_sioux_falls(), 10.0 / 3.0);
}

// Classification and validation ----------------------------------------------------

std::map<int, IncomeClass> classify_links_by_income(const Network& net, const Scenario& sc)
{
    std::map<int, IncomeClass> out;
    for (const DamagedLink& d : sc.damaged) {
        const Link& l = net.link(d.link);
        out[d.link] = sc.levels.classify(std::min(sc.income(l.from), sc.income(l.to)));
    }
    return out;
}

std::vector<bool> reachable_from(const Network& net, std::span<const double> capacities, int origin)
{
    std::vector<bool> seen(static_cast<std::size_t>(net.zone_count()) + 1, false);
    std::queue<int> frontier;
    seen[static_cast<std::size_t>(origin)] = true;
    frontier.push(origin);
    while (!frontier.empty()) {
        const int z = frontier.front();
        frontier.pop();
        for (int li : net.outgoing(z)) {
            if (capacities[static_cast<std::size_t>(li)] <= kCapacityEpsilon)
                continue;
            const int to = net.links()[static_cast<std::size_t>(li)].to;
            if (!seen[static_cast<std::size_t>(to)]) {
                seen[static_cast<std::size_t>(to)] = true;
                frontier.push(to);
            }
        }
    }
    return seen;
}

namespace {

void check_connectivity(const Network& net, const DemandTable& demand, std::span<const double> caps,
                        const std::string& suffix, std::vector<std::string>& out)
{
    for (int r = 1; r <= net.zone_count(); ++r) {
        if (demand.origin_total(r) <= 0.0)
            continue;
        const std::vector<bool> seen = reachable_from(net, caps, r);
        for (int s = 1; s <= net.zone_count(); ++s)
            if (demand.at(r, s) > 0.0 && !seen[static_cast<std::size_t>(s)])
                out.push_back("OD (" + std::to_string(r) + "," + std::to_string(s) + ") unreachable" + suffix);
    }
}

}  // namespace

ValidationReport validate(const Network& net, const DemandTable& demand, const Scenario& sc)
{
    ValidationReport rep;
    auto& errs = rep.errors;

    if (demand.zone_count() != net.zone_count())
        errs.push_back("demand has " + std::to_string(demand.zone_count()) + " zones, network has " +
                       std::to_string(net.zone_count()));
    if (!(sc.mu >= 0.0 && sc.mu <= 1.0))
        errs.push_back("mu out of range");
    if (!(sc.budget >= 0.0))
        errs.push_back("budget must be non-negative");
    if (!(sc.lambda1 >= 0.0) || !(sc.lambda2 >= 0.0))
        errs.push_back("penalty weights must be non-negative");
    if (!(sc.bpr_alpha >= 0.0) || !(sc.bpr_beta > 0.0))
        errs.push_back("BPR parameters out of range");
    if (sc.incomes.size() != static_cast<std::size_t>(net.zone_count()))
        errs.push_back("incomes cover " + std::to_string(sc.incomes.size()) + " of " +
                       std::to_string(net.zone_count()) + " zones");
    for (std::size_t z = 0; z < sc.incomes.size(); ++z)
        if (!(sc.incomes[z] > 0.0))
            errs.push_back("income for zone " + std::to_string(z + 1) + " must be positive");

    std::set<int> seen;
    for (const DamagedLink& d : sc.damaged) {
        if (!net.has_link(d.link)) {
            errs.push_back("unknown link id " + std::to_string(d.link));
            continue;
        }
        if (!seen.insert(d.link).second)
            errs.push_back("link " + std::to_string(d.link) + " listed as damaged twice");
        const double cap = net.link(d.link).capacity;
        if (d.residual < 0.0 || d.residual > cap)
            errs.push_back("link " + std::to_string(d.link) + ": residual capacity outside [0, " +
                           std::to_string(cap) + "]");
    }

    if (demand.zone_count() == net.zone_count()) {
        const std::vector<double> intact = net.capacities();
        check_connectivity(net, demand, intact, "", errs);
        if (errs.empty())
            check_connectivity(net, demand, sc.residual_capacities(net), " after damage", rep.warnings);
    }
    return rep;
}

}  // namespace eqr
