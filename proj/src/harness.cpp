#include "eqrestore/harness.hpp"

#include "eqrestore/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

namespace eqr {

std::optional<SolverKind> parse_solver(std::string_view s)
{
    if (s == "sa")
        return SolverKind::SA;
    if (s == "ga")
        return SolverKind::GA;
    if (s == "greedy")
        return SolverKind::Greedy;
    if (s == "oracle")
        return SolverKind::Oracle;
    if (s == "cqm")
        return SolverKind::Cqm;
    return std::nullopt;
}

std::string_view to_string(SolverKind s)
{
    switch (s) {
    case SolverKind::SA: return "sa";
    case SolverKind::GA: return "ga";
    case SolverKind::Greedy: return "greedy";
    case SolverKind::Oracle: return "oracle";
    case SolverKind::Cqm: return "cqm";
    }
    return "sa";
}

IncomeBuckets aggregate_by_income(const RestorationPlan& plan, const std::map<int, IncomeClass>& classes)
{
    IncomeBuckets b;
    for (std::size_t i = 0; i < plan.links.size(); ++i) {
        const auto it = classes.find(plan.links[i]);
        if (it == classes.end())
            throw std::invalid_argument("no income class for link " + std::to_string(plan.links[i]));
        switch (it->second) {
        case IncomeClass::Low: b.low += plan.recovery[i]; break;
        case IncomeClass::Average: b.average += plan.recovery[i]; break;
        case IncomeClass::High: b.high += plan.recovery[i]; break;
        }
    }
    return b;
}

ReportRow make_row(const RunSpec& spec, const Solution& s, const std::map<int, IncomeClass>& classes)
{
    ReportRow r;
    r.solver = std::string(to_string(spec.solver));
    r.budget = spec.budget;
    r.mu = spec.mu;
    r.seed = spec.seed;
    r.D = s.breakdown.D;
    r.E = s.breakdown.E;
    r.R = s.breakdown.R;
    r.H = s.breakdown.H;
    r.full_D = s.full.D;
    r.full_R = s.full.R;
    r.cost = s.plan.cost();
    r.wall_time_s = s.wall_time_s;
    r.groups = aggregate_by_income(s.plan, classes);
    r.feasible = s.feasible;
    r.within_budget = s.within_budget;
    r.evaluations = s.evaluations;
    for (std::size_t i = 0; i < s.plan.links.size(); ++i)
        r.plan.emplace_back(s.plan.links[i], s.plan.recovery[i]);
    return r;
}

Solution solve_once(const Problem& base, const RunSpec& spec, const SolverSettings& settings)
{
    Scenario sc = base.scenario();
    sc.budget = spec.budget;
    sc.mu = spec.mu;
    const Problem problem = base.with_scenario(std::move(sc));
    switch (spec.solver) {
    case SolverKind::SA: {
        AnnealConfig cfg = settings.sa;
        cfg.seed = spec.seed;
        return run_sa(problem, cfg).solution;
    }
    case SolverKind::GA: {
        GAConfig cfg = settings.ga;
        cfg.seed = spec.seed;
        return run_ga(problem, cfg).solution;
    }
    case SolverKind::Greedy: return greedy_marginal(problem, settings.greedy_step);
    case SolverKind::Oracle: return brute_force(problem, settings.oracle_grid);
    case SolverKind::Cqm: return submit_cqm(problem, settings.cqm);
    }
    throw std::logic_error("unknown solver");
}

void SweepSpec::check() const
{
    if (budgets.empty() || mus.empty() || solvers.empty() || seeds.empty())
        throw std::invalid_argument("sweep lists must be non-empty");
    for (double b : budgets)
        if (!(b >= 0.0))
            throw std::invalid_argument("sweep budgets must be non-negative");
}

std::vector<RunSpec> SweepSpec::cells() const
{
    std::vector<RunSpec> out;
    for (double b : budgets)
        for (double m : mus)
            for (SolverKind s : solvers)
                for (std::uint64_t seed : seeds)
                    out.push_back(RunSpec{s, b, m, seed});
    return out;
}

std::vector<ReportRow> sweep(const Problem& base, const SweepSpec& spec, const SolverSettings& settings, int jobs,
                             const std::function<void(const ReportRow&)>& sink)
{
    spec.check();
    const std::vector<RunSpec> cells = spec.cells();
    const std::map<int, IncomeClass> classes = classify_links_by_income(base.network(), base.scenario());
    std::vector<std::optional<ReportRow>> done(cells.size());
    std::size_t next = 0;
    std::mutex mutex;

    SolverSettings inner = settings;
    inner.sa.jobs = 1;
    inner.ga.jobs = jobs > 1 ? 1 : settings.ga.jobs;

    parallel_for(cells.size(), jobs, [&](std::size_t k) {
        ReportRow row;
        try {
            row = make_row(cells[k], solve_once(base, cells[k], inner), classes);
        } catch (const std::exception& e) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row = ReportRow{};
            row.solver = std::string(to_string(cells[k].solver));
            row.budget = cells[k].budget;
            row.mu = cells[k].mu;
            row.seed = cells[k].seed;
            row.D = row.E = row.R = row.H = row.full_D = row.full_R = row.cost = nan;
            row.error = e.what();
        }
        std::lock_guard<std::mutex> lock(mutex);
        done[k] = std::move(row);
        while (next < done.size() && done[next]) {
            if (sink)
                sink(*done[next]);
            ++next;
        }
    });

    std::vector<ReportRow> rows;
    rows.reserve(done.size());
    for (auto& r : done)
        rows.push_back(std::move(*r));
    return rows;
}

std::optional<ReportFormat> parse_format(std::string_view s)
{
    if (s == "csv")
        return ReportFormat::Csv;
    if (s == "json")
        return ReportFormat::Json;
    return std::nullopt;
}

namespace {

const char* const kColumns[] = {"solver", "budget",   "mu",   "seed", "D",        "E",             "R",
                                "H",      "full_D",   "full_R", "cost", "low",    "average",       "high",
                                "feasible", "within_budget", "evaluations", "wall_time_s", "plan", "error"};

std::string num(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_num(const std::string& s)
{
    if (s == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf")
        return std::numeric_limits<double>::infinity();
    if (s == "-inf")
        return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size())
        throw std::invalid_argument("bad number '" + s + "'");
    return v;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"')
            q += '"';
        q += c;
    }
    return q + "\"";
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::string plan_field(const ReportRow& r)
{
    std::string s;
    for (const auto& [link, value] : r.plan) {
        if (!s.empty())
            s += ';';
        s += std::to_string(link) + ':' + num(value);
    }
    return s;
}

nlohmann::json json_num(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(num(v));
}

}  // namespace

RowWriter::RowWriter(std::ostream& out, ReportFormat format, bool timing) : out_(out), format_(format), timing_(timing)
{
}

void RowWriter::write(const ReportRow& r)
{
    const double wall = timing_ ? r.wall_time_s : 0.0;
    if (format_ == ReportFormat::Csv) {
        if (!header_done_) {
            bool first = true;
            for (const char* c : kColumns) {
                out_ << (first ? "" : ",") << c;
                first = false;
            }
            out_ << '\n';
            header_done_ = true;
        }
        out_ << csv_field(r.solver) << ',' << num(r.budget) << ',' << num(r.mu) << ',' << r.seed << ',' << num(r.D)
             << ',' << num(r.E) << ',' << num(r.R) << ',' << num(r.H) << ',' << num(r.full_D) << ',' << num(r.full_R)
             << ',' << num(r.cost) << ',' << num(r.groups.low) << ',' << num(r.groups.average) << ','
             << num(r.groups.high) << ',' << (r.feasible ? 1 : 0) << ',' << (r.within_budget ? 1 : 0) << ','
             << r.evaluations << ',' << num(wall) << ',' << plan_field(r) << ',' << csv_field(r.error) << '\n';
    } else {
        nlohmann::json j;
        j["solver"] = r.solver;
        j["budget"] = json_num(r.budget);
        j["mu"] = json_num(r.mu);
        j["seed"] = r.seed;
        j["D"] = json_num(r.D);
        j["E"] = json_num(r.E);
        j["R"] = json_num(r.R);
        j["H"] = json_num(r.H);
        j["full_D"] = json_num(r.full_D);
        j["full_R"] = json_num(r.full_R);
        j["cost"] = json_num(r.cost);
        j["groups"] = {{"low", r.groups.low}, {"average", r.groups.average}, {"high", r.groups.high}};
        j["feasible"] = r.feasible;
        j["within_budget"] = r.within_budget;
        j["evaluations"] = r.evaluations;
        j["wall_time_s"] = wall;
        nlohmann::json plan = nlohmann::json::array();
        for (const auto& [link, value] : r.plan)
            plan.push_back({{"link", link}, {"recovery", value}});
        j["plan"] = std::move(plan);
        if (!r.error.empty())
            j["error"] = r.error;
        out_ << j.dump() << '\n';
    }
    out_.flush();
}

std::vector<ReportRow> read_report_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw InputError("empty report");
    const std::vector<std::string> header = split_csv(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i)
        col[header[i]] = i;
    for (const char* c : kColumns)
        if (!col.count(c))
            throw InputError(std::string("report has no '") + c + "' column", 1);

    std::vector<ReportRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const std::vector<std::string> f = split_csv(line);
        if (f.size() != header.size())
            throw InputError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()),
                             lineno);
        auto get = [&](const char* name) -> const std::string& { return f[col.at(name)]; };
        try {
            ReportRow r;
            r.solver = get("solver");
            r.budget = parse_num(get("budget"));
            r.mu = parse_num(get("mu"));
            r.seed = std::stoull(get("seed"));
            r.D = parse_num(get("D"));
            r.E = parse_num(get("E"));
            r.R = parse_num(get("R"));
            r.H = parse_num(get("H"));
            r.full_D = parse_num(get("full_D"));
            r.full_R = parse_num(get("full_R"));
            r.cost = parse_num(get("cost"));
            r.groups.low = parse_num(get("low"));
            r.groups.average = parse_num(get("average"));
            r.groups.high = parse_num(get("high"));
            r.feasible = get("feasible") == "1";
            r.within_budget = get("within_budget") == "1";
            r.evaluations = std::stoull(get("evaluations"));
            r.wall_time_s = parse_num(get("wall_time_s"));
            std::istringstream plan(get("plan"));
            std::string item;
            while (std::getline(plan, item, ';')) {
                const auto colon = item.find(':');
                if (colon == std::string::npos)
                    throw std::invalid_argument("bad plan entry '" + item + "'");
                r.plan.emplace_back(std::stoi(item.substr(0, colon)), parse_num(item.substr(colon + 1)));
            }
            r.error = get("error");
            rows.push_back(std::move(r));
        } catch (const std::logic_error& e) {
            throw InputError(e.what(), lineno);
        }
    }
    return rows;
}

CompareSummary compare_report(const std::vector<ReportRow>& rows, double utilization_threshold)
{
    std::set<std::string> solvers;
    for (const ReportRow& r : rows)
        solvers.insert(r.solver);
    if (solvers.size() < 2)
        throw std::invalid_argument("need two solvers");

    std::map<std::pair<double, std::string>, std::vector<const ReportRow*>> groups;
    for (const ReportRow& r : rows)
        if (r.error.empty())
            groups[{r.budget, r.solver}].push_back(&r);

    CompareSummary out;
    for (const auto& [key, members] : groups) {
        CompareEntry e;
        e.budget = key.first;
        e.solver = key.second;
        e.rows = members.size();
        const ReportRow* best = members.front();
        double wall = 0.0;
        for (const ReportRow* r : members) {
            if (r->H < best->H)
                best = r;
            wall += r->wall_time_s;
        }
        e.best_H = best->H;
        e.cost = best->cost;
        e.utilization = e.budget > 0.0 ? e.cost / e.budget : 1.0;
        e.mean_wall_time_s = wall / static_cast<double>(members.size());
        e.underspent = e.utilization < utilization_threshold;
        out.entries.push_back(e);
    }
    return out;
}

std::string CompareSummary::text() const
{
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%8s  %-7s %14s %10s %7s %12s %5s\n", "budget", "solver", "best_H", "cost", "util",
                  "wall_time_s", "rows");
    os << buf;
    for (const CompareEntry& e : entries) {
        std::snprintf(buf, sizeof buf, "%8.2f  %-7s %14.8g %10.4f %6.1f%% %12.3f %5zu%s\n", e.budget, e.solver.c_str(),
                      e.best_H, e.cost, 100.0 * e.utilization, e.mean_wall_time_s, e.rows,
                      e.underspent ? "  underspent" : "");
        os << buf;
    }
    return os.str();
}

void write_plot_rows(std::ostream& out, const std::vector<ReportRow>& rows)
{
    out << "solver,mu,budget,variable,group,value\n";
    for (const ReportRow& r : rows) {
        if (!r.error.empty())
            continue;
        const std::string head = csv_field(r.solver) + ',' + num(r.mu) + ',' + num(r.budget) + ',';
        out << head << "restored_capacity,low," << num(r.groups.low) << '\n';
        out << head << "restored_capacity,average," << num(r.groups.average) << '\n';
        out << head << "restored_capacity,high," << num(r.groups.high) << '\n';
        out << head << "D,all," << num(r.D) << '\n';
        out << head << "E,all," << num(r.E) << '\n';
        out << head << "R,all," << num(r.R) << '\n';
        out << head << "cost,all," << num(r.cost) << '\n';
    }
}

}  // namespace eqr
