#include "eqrestore/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

namespace eqr {

double RestorationPlan::cost() const
{
    return std::accumulate(recovery.begin(), recovery.end(), 0.0);
}

double RestorationPlan::recovery_of(int link) const
{
    for (std::size_t i = 0; i < links.size(); ++i)
        if (links[i] == link)
            return recovery[i];
    return 0.0;
}

std::string format_breakdown(const ObjectiveBreakdown& b)
{
    std::ostringstream os;
    os << std::setprecision(12) << "D=" << b.D << " E=" << b.E << " R=" << b.R << " budget_penalty=" << b.budget_penalty
       << " capacity_penalty=" << b.capacity_penalty << " H=" << b.H;
    return os.str();
}

std::optional<EquityMode> parse_equity_mode(std::string_view s)
{
    if (s == "literal")
        return EquityMode::Literal;
    if (s == "quadratic")
        return EquityMode::Quadratic;
    if (s == "responsive")
        return EquityMode::Responsive;
    return std::nullopt;
}

std::optional<PenaltyMode> parse_penalty_mode(std::string_view s)
{
    if (s == "equality")
        return PenaltyMode::Equality;
    if (s == "one-sided")
        return PenaltyMode::OneSided;
    return std::nullopt;
}

std::string_view to_string(EquityMode m)
{
    switch (m) {
    case EquityMode::Literal: return "literal";
    case EquityMode::Quadratic: return "quadratic";
    case EquityMode::Responsive: return "responsive";
    }
    return "responsive";
}

std::string_view to_string(PenaltyMode m)
{
    return m == PenaltyMode::Equality ? "equality" : "one-sided";
}

double deficiency_full(double tstt_before, double tstt_after)
{
    if (!(tstt_before > 0.0))
        throw std::invalid_argument("pre-disaster TSTT must be positive");
    return std::max(0.0, (tstt_after - tstt_before) / tstt_before);
}

namespace {

inline double pow_beta(double r, double beta)
{
    if (beta == 4.0) {
        const double r2 = r * r;
        return r2 * r2;
    }
    return std::pow(r, beta);
}

}  // namespace

double deficiency_surrogate(std::span<const double> flows, std::span<const double> caps_pre,
                            std::span<const double> caps_post, std::span<const double> free_flow_times,
                            const BprParams& bpr)
{
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const double x = flows[i];
        if (x <= 0.0)
            continue;
        if (caps_post[i] < kCapacityEpsilon)
            throw std::invalid_argument("link " + std::to_string(i + 1) + " carries flow with no capacity");
        const double t0 = free_flow_times[i];
        const double pre = pow_beta(x / caps_pre[i], bpr.beta);
        const double post = pow_beta(x / caps_post[i], bpr.beta);
        num += bpr.alpha * x * t0 * (post - pre);
        den += x * t0 * (1.0 + bpr.alpha * pre);
    }
    if (!(den > 0.0))
        throw std::invalid_argument("no reference flow on any link");
    return num / den;
}

double gini(std::span<const double> values, std::optional<double> mean)
{
    if (values.empty())
        throw std::invalid_argument("gini of an empty vector");
    const double n = static_cast<double>(values.size());
    const double avg = mean ? *mean : std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (!(avg > 0.0))
        throw std::invalid_argument("gini needs a positive mean");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    // sum_r sum_s |v_r - v_s| = 2 * sum_i (2i - n - 1) v_(i), i = 1..n
    double acc = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i)
        acc += (2.0 * static_cast<double>(i + 1) - n - 1.0) * sorted[i];
    return 2.0 * acc / (2.0 * n * n * avg);
}

double equity_literal(const Scenario& sc)
{
    return gini(sc.incomes);
}

double equity_quadratic(const Scenario& sc, double w_bar)
{
    const auto& inc = sc.incomes;
    const double n = static_cast<double>(inc.size());
    const double mean = std::accumulate(inc.begin(), inc.end(), 0.0) / n;
    double sum = 0.0;
    for (double a : inc)
        for (double b : inc)
            sum += (a - b) * (a - b);
    return sum / (2.0 * n * n * w_bar * mean);
}

double equity_responsive(const RestorationPlan& plan, const Scenario& sc, const Network& net)
{
    const auto zones = static_cast<std::size_t>(net.zone_count());
    std::vector<double> restored(zones, 0.0);
    std::vector<double> recoverable(zones, 0.0);
    std::vector<bool> touched(zones, false);
    for (std::size_t i = 0; i < sc.damaged.size(); ++i) {
        const DamagedLink& d = sc.damaged[i];
        const Link& l = net.link(d.link);
        const double head = l.capacity - d.residual;
        const double planned = i < plan.links.size() && plan.links[i] == d.link ? plan.recovery[i] : plan.recovery_of(d.link);
        const double rec = std::clamp(planned, 0.0, head);
        for (int z : {l.from, l.to}) {
            const auto zi = static_cast<std::size_t>(z - 1);
            touched[zi] = true;
            restored[zi] += rec;
            recoverable[zi] += head;
        }
    }
    std::vector<double> values(zones);
    for (std::size_t z = 0; z < zones; ++z) {
        const double share = touched[z] && recoverable[z] > 0.0 ? restored[z] / recoverable[z] : 1.0;
        values[z] = sc.incomes[z] * share;
    }
    // Nothing restored anywhere and every zone touched: all values are zero.
    if (std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; }))
        return 0.0;
    return gini(values);
}

double resilience(double D, double E, double mu)
{
    if (!(mu >= 0.0 && mu <= 1.0))
        throw std::invalid_argument("mu out of range");
    // A zero weight drops its term so an infinite D (disconnected network)
    // does not turn the pure-equity objective into NaN.
    const double d_term = mu == 0.0 ? 0.0 : mu * D;
    const double e_term = mu == 1.0 ? 0.0 : (1.0 - mu) * E;
    return d_term + e_term;
}

double budget_penalty(double cost, const Scenario& sc, PenaltyMode mode)
{
    const double excess = mode == PenaltyMode::Equality ? cost - sc.budget : std::max(0.0, cost - sc.budget);
    return sc.lambda1 * excess * excess;
}

ObjectiveBreakdown hamiltonian(const RestorationPlan& plan, const Scenario& sc, const Network& net,
                               std::span<const double> flows, const ObjectiveOptions& opts)
{
    if (plan.links.size() != sc.damaged.size() || plan.recovery.size() != plan.links.size())
        throw std::invalid_argument("plan does not match the scenario's damaged links");
    bool aligned = true;
    for (std::size_t i = 0; i < plan.links.size() && aligned; ++i)
        aligned = plan.links[i] == sc.damaged[i].link;
    if (!aligned) {
        const std::set<int> planned(plan.links.begin(), plan.links.end());
        for (const DamagedLink& d : sc.damaged)
            if (!planned.count(d.link))
                throw std::invalid_argument("plan has no entry for damaged link " + std::to_string(d.link));
    }

    const auto links = net.links();
    std::vector<double> pre(links.size());
    std::vector<double> t0(links.size());
    for (std::size_t i = 0; i < links.size(); ++i) {
        pre[i] = links[i].capacity;
        t0[i] = links[i].free_flow_time;
    }
    std::vector<double> post = pre;
    double overshoot = 0.0;
    for (std::size_t i = 0; i < sc.damaged.size(); ++i) {
        const DamagedLink& d = sc.damaged[i];
        const auto li = static_cast<std::size_t>(d.link - 1);
        const double rec = aligned ? plan.recovery[i] : plan.recovery_of(d.link);
        const double c = d.residual + rec;
        const double over = std::max(0.0, c - pre[li]);
        overshoot += over * over;
        post[li] = std::max(c, kCapacityEpsilon);
    }

    ObjectiveBreakdown b;
    b.D = deficiency_surrogate(flows, pre, post, t0, BprParams{sc.bpr_alpha, sc.bpr_beta});
    switch (opts.equity) {
    case EquityMode::Literal: b.E = equity_literal(sc); break;
    case EquityMode::Quadratic: b.E = equity_quadratic(sc, opts.w_bar); break;
    case EquityMode::Responsive: b.E = equity_responsive(plan, sc, net); break;
    }
    b.R = resilience(b.D, b.E, sc.mu);
    b.budget_penalty = budget_penalty(plan.cost(), sc, opts.penalty);
    b.capacity_penalty = sc.lambda2 * overshoot;
    b.H = b.R + b.budget_penalty + b.capacity_penalty;
    return b;
}

}  // namespace eqr
