#include "eqrestore/cqm.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <regex>
#include <thread>

namespace eqr {

using nlohmann::json;

double CqmModel::objective(std::span<const double> x) const
{
    std::map<std::string, double> value;
    for (std::size_t i = 0; i < variables.size() && i < x.size(); ++i)
        value[variables[i].id] = x[i];
    double f = offset;
    for (const CqmLinear& t : linear)
        f += t.coeff * value.at(t.id);
    for (const CqmQuadratic& q : quadratic)
        f += q.coeff * value.at(q.u) * value.at(q.v);
    return f;
}

std::string cqm_variable_id(int link)
{
    return "c_" + std::to_string(link);
}

CqmModel build_cqm(const Problem& problem)
{
    const Scenario& sc = problem.scenario();
    const Network& net = problem.network();
    const auto head = problem.headroom();
    const std::vector<double>& flows = problem.reference().flows;
    const double mu = sc.mu;
    const double alpha = sc.bpr_alpha;
    const double beta = sc.bpr_beta;

    const double total_head = std::accumulate(head.begin(), head.end(), 0.0);
    const double share = total_head > 0.0 ? std::min(1.0, sc.budget / total_head) : 0.0;
    std::vector<double> anchor(head.size());
    for (std::size_t i = 0; i < head.size(); ++i)
        anchor[i] = head[i] * share;

    double den = 0.0;
    for (const Link& l : net.links()) {
        const double x = flows[static_cast<std::size_t>(l.id - 1)];
        if (x > 0.0)
            den += x * l.free_flow_time * (1.0 + alpha * std::pow(x / l.capacity, beta));
    }

    CqmModel m;
    double at_anchor = 0.0;
    for (std::size_t i = 0; i < sc.damaged.size(); ++i) {
        const DamagedLink& d = sc.damaged[i];
        const Link& l = net.link(d.link);
        const std::string id = cqm_variable_id(d.link);
        m.variables.push_back(CqmVariable{id, 0.0, head[i]});
        const double x = flows[static_cast<std::size_t>(d.link - 1)];
        if (!(x > 0.0) || !(den > 0.0) || mu == 0.0)
            continue;
        // f(c) = k c^-beta is this link's share of D; expand in r around the anchor.
        const double k = alpha * x * l.free_flow_time * std::pow(x, beta) / den;
        const double c = std::max(d.residual + anchor[i], kCapacityEpsilon);
        const double f = k * std::pow(c, -beta);
        const double f1 = -beta * k * std::pow(c, -beta - 1.0);
        const double f2 = beta * (beta + 1.0) * k * std::pow(c, -beta - 2.0);
        const double pre = k * std::pow(l.capacity, -beta);
        const double lin = mu * (f1 - f2 * anchor[i]);
        const double quad = mu * 0.5 * f2;
        m.linear.push_back(CqmLinear{id, lin});
        m.quadratic.push_back(CqmQuadratic{id, id, quad});
        at_anchor += mu * (f - pre) - lin * anchor[i] - quad * anchor[i] * anchor[i];
    }
    const double equity = mu == 1.0 ? 0.0 : (1.0 - mu) * equity_quadratic(sc, problem.options().objective.w_bar);
    m.offset = at_anchor + equity;

    CqmConstraint budget;
    budget.label = "budget";
    for (const CqmVariable& v : m.variables)
        budget.terms.push_back(CqmLinear{v.id, 1.0});
    budget.sense = problem.options().objective.penalty == PenaltyMode::Equality ? "==" : "<=";
    budget.rhs = sc.budget;
    m.constraints.push_back(std::move(budget));
    return m;
}

std::string cqm_to_json(const CqmModel& model)
{
    json doc;
    doc["variables"] = json::array();
    for (const CqmVariable& v : model.variables)
        doc["variables"].push_back({{"id", v.id}, {"lower", v.lower}, {"upper", v.upper}});
    json obj;
    obj["linear"] = json::array();
    for (const CqmLinear& t : model.linear)
        obj["linear"].push_back({{"id", t.id}, {"coeff", t.coeff}});
    obj["quadratic"] = json::array();
    for (const CqmQuadratic& q : model.quadratic)
        obj["quadratic"].push_back({{"u", q.u}, {"v", q.v}, {"coeff", q.coeff}});
    obj["offset"] = model.offset;
    doc["objective"] = std::move(obj);
    doc["constraints"] = json::array();
    for (const CqmConstraint& c : model.constraints) {
        json terms = json::array();
        for (const CqmLinear& t : c.terms)
            terms.push_back({{"id", t.id}, {"coeff", t.coeff}});
        doc["constraints"].push_back({{"label", c.label}, {"terms", terms}, {"sense", c.sense}, {"rhs", c.rhs}});
    }
    return doc.dump();
}

CqmModel cqm_from_json(const std::string& text)
{
    CqmModel m;
    try {
        const json doc = json::parse(text);
        for (const json& v : doc.at("variables"))
            m.variables.push_back(CqmVariable{v.at("id").get<std::string>(), v.at("lower").get<double>(),
                                              v.at("upper").get<double>()});
        const json& obj = doc.at("objective");
        for (const json& t : obj.at("linear"))
            m.linear.push_back(CqmLinear{t.at("id").get<std::string>(), t.at("coeff").get<double>()});
        for (const json& q : obj.at("quadratic"))
            m.quadratic.push_back(
                CqmQuadratic{q.at("u").get<std::string>(), q.at("v").get<std::string>(), q.at("coeff").get<double>()});
        m.offset = obj.value("offset", 0.0);
        for (const json& c : doc.at("constraints")) {
            CqmConstraint con;
            con.label = c.value("label", "");
            for (const json& t : c.at("terms"))
                con.terms.push_back(CqmLinear{t.at("id").get<std::string>(), t.at("coeff").get<double>()});
            con.sense = c.at("sense").get<std::string>();
            con.rhs = c.at("rhs").get<double>();
            m.constraints.push_back(std::move(con));
        }
    } catch (const json::exception& e) {
        throw CqmProtocolError(std::string("malformed model document: ") + e.what());
    }
    return m;
}

namespace {

struct Endpoint {
    std::string origin;  // scheme://host:port
    std::string base;    // path prefix without trailing slash
};

Endpoint parse_endpoint(const std::string& url)
{
    static const std::regex re(R"(^(http)://([^/:]+)(:([0-9]+))?(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re))
        throw CqmConnectionError("unsupported endpoint '" + url + "' (expected http://host[:port][/path])");
    Endpoint e;
    e.origin = m[1].str() + "://" + m[2].str() + (m[3].matched ? m[3].str() : "");
    e.base = m[5].matched ? m[5].str() : "";
    while (!e.base.empty() && e.base.back() == '/')
        e.base.pop_back();
    return e;
}

json parse_body(const httplib::Result& res, const std::string& what)
{
    try {
        return json::parse(res->body);
    } catch (const json::exception&) {
        throw CqmProtocolError(what + ": response is not JSON");
    }
}

void check_status(const httplib::Result& res, const std::string& what)
{
    if (!res)
        throw CqmConnectionError(what + ": " + httplib::to_string(res.error()));
    if (res->status == 401 || res->status == 403)
        throw CqmAuthenticationError(what + ": credential rejected (HTTP " + std::to_string(res->status) + ")");
    if (res->status < 200 || res->status >= 300)
        throw CqmProtocolError(what + ": HTTP " + std::to_string(res->status));
}

}  // namespace

Solution submit_cqm(const Problem& problem, const CqmClientOptions& opts)
{
    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    const Endpoint ep = parse_endpoint(opts.endpoint);
    httplib::Client cli(ep.origin);
    const auto secs = std::chrono::duration<double>(opts.timeout_s);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(secs);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    const httplib::Headers headers{{"Authorization", "Bearer " + opts.token}};

    const CqmModel model = build_cqm(problem);
    auto posted = cli.Post(ep.base + "/problems", headers, cqm_to_json(model), "application/json");
    check_status(posted, "submit");
    const json ticket = parse_body(posted, "submit");
    if (!ticket.contains("id") || !ticket["id"].is_string())
        throw CqmProtocolError("submit: response has no problem id");
    const std::string id = ticket["id"].get<std::string>();

    json answer;
    for (;;) {
        auto polled = cli.Get(ep.base + "/problems/" + id, headers);
        check_status(polled, "poll");
        answer = parse_body(polled, "poll");
        const std::string status = answer.value("status", "");
        if (status == "completed")
            break;
        if (status == "infeasible")
            throw CqmInfeasibleError("service reports no feasible sample: " + answer.value("message", ""));
        if (status == "failed")
            throw CqmProtocolError("service failed: " + answer.value("message", ""));
        if (status != "pending" && status != "running")
            throw CqmProtocolError("poll: unknown status '" + status + "'");
        if (std::chrono::duration<double>(Clock::now() - start).count() > opts.timeout_s)
            throw CqmTimeoutError("no answer within " + std::to_string(opts.timeout_s) + " s");
        std::this_thread::sleep_for(std::chrono::duration<double>(opts.poll_interval_s));
    }

    if (!answer.contains("sample") || !answer["sample"].is_object())
        throw CqmProtocolError("poll: completed without a sample");
    const json& sample = answer["sample"];
    std::vector<double> recovery;
    recovery.reserve(model.variables.size());
    for (const CqmVariable& v : model.variables) {
        if (!sample.contains(v.id) || !sample[v.id].is_number())
            throw CqmProtocolError("sample has no value for " + v.id);
        recovery.push_back(sample[v.id].get<double>());
    }
    Solution s = make_solution(problem, recovery, "cqm");
    s.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
    s.evaluations = 0;
    s.converged = true;
    return s;
}

}  // namespace eqr
