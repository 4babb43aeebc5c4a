#include "eqrestore/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

using namespace eqr;

namespace {

constexpr int kOk = 0;
constexpr int kInfeasible = 1;
constexpr int kInputError = 2;

struct InputOptions {
    std::string network;
    std::string trips;
    std::string scenario;
    std::string equity = "responsive";
    std::string penalty = "equality";
    std::string energy = "surrogate";
    bool no_timing = false;
};

struct SolverOptions {
    std::string solver = "sa";
    int generations = 200;
    int population = 50;
    std::string ga_fitness = "full";
    double time_limit = 0.0;
    int restarts = 3;
    int steps = 0;
    int grid = 6;
    double step = 1.0;
    std::string cqm_endpoint;
    double cqm_timeout = 60.0;
};

void add_input_options(CLI::App* app, InputOptions& in)
{
    app->add_option("--network", in.network, "TNTP network file (default: built-in Sioux Falls)");
    app->add_option("--trips", in.trips, "TNTP trips file (default: built-in synthetic demand)");
    app->add_option("--scenario", in.scenario, "scenario YAML/JSON (default: built-in damage scenario)");
    app->add_option("--equity", in.equity, "equity term inside H")
        ->check(CLI::IsMember({"literal", "quadratic", "responsive"}));
    app->add_option("--penalty", in.penalty, "budget penalty")->check(CLI::IsMember({"equality", "one-sided"}));
    app->add_option("--energy", in.energy, "deficiency used by sa/greedy/oracle")
        ->check(CLI::IsMember({"surrogate", "full"}));
    app->add_flag("--no-timing", in.no_timing, "write wall times as 0 for byte-identical reports");
}

void add_solver_options(CLI::App* app, SolverOptions& so)
{
    app->add_option("--generations", so.generations, "GA generations")->check(CLI::PositiveNumber);
    app->add_option("--population", so.population, "GA population size")->check(CLI::Range(2, 1000000));
    app->add_option("--ga-fitness", so.ga_fitness, "GA deficiency")->check(CLI::IsMember({"full", "surrogate"}));
    app->add_option("--time-limit", so.time_limit, "GA wall-clock cap in seconds (0: none)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--restarts", so.restarts, "SA restarts")->check(CLI::PositiveNumber);
    app->add_option("--steps", so.steps, "SA steps per temperature (0: 50 per damaged link)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--grid", so.grid, "oracle grid levels per link")->check(CLI::Range(2, 1000000));
    app->add_option("--step", so.step, "greedy capacity increment")->check(CLI::PositiveNumber);
    app->add_option("--cqm-endpoint", so.cqm_endpoint, "CQM service base URL (token from EQR_CQM_TOKEN)");
    app->add_option("--cqm-timeout", so.cqm_timeout, "CQM service timeout in seconds")->check(CLI::PositiveNumber);
}

Problem load_problem(const InputOptions& in)
{
    const Network net = in.network.empty() ? builtin_sioux_falls() : parse_network(read_file(in.network));
    DemandTable demand = in.trips.empty() ? (in.network.empty() ? default_sioux_falls_demand()
                                                                : synthetic_symmetric_demand(net, 1.0))
                                          : parse_trips(read_file(in.trips), net.zone_count());
    Scenario sc;
    if (!in.scenario.empty())
        sc = load_scenario(read_file(in.scenario), net);
    else if (in.network.empty())
        sc = default_sioux_falls_scenario();
    else
        throw InputError("--scenario is required with a custom --network");

    ProblemOptions opts;
    opts.objective.equity = *parse_equity_mode(in.equity);
    opts.objective.penalty = *parse_penalty_mode(in.penalty);
    opts.energy = in.energy == "full" ? EnergyMode::Full : EnergyMode::Surrogate;
    return Problem(net, std::move(demand), std::move(sc), opts);
}

SolverSettings make_settings(const SolverOptions& so, int jobs)
{
    SolverSettings s;
    s.sa.restarts = so.restarts;
    if (so.steps > 0)
        s.sa.steps_per_temperature = so.steps;
    s.sa.jobs = jobs;
    s.ga.generations = so.generations;
    s.ga.population_size = so.population;
    s.ga.tournament_size = std::min(s.ga.tournament_size, so.population);
    s.ga.fitness = so.ga_fitness == "full" ? EnergyMode::Full : EnergyMode::Surrogate;
    if (so.time_limit > 0.0)
        s.ga.time_limit_s = so.time_limit;
    s.ga.jobs = jobs;
    s.oracle_grid = so.grid;
    s.greedy_step = so.step;
    s.cqm.endpoint = so.cqm_endpoint;
    s.cqm.timeout_s = so.cqm_timeout;
    if (const char* token = std::getenv(kCqmTokenEnv))
        s.cqm.token = token;
    return s;
}

void print_warnings(const std::vector<std::string>& warnings)
{
    constexpr std::size_t shown = 3;
    for (std::size_t i = 0; i < warnings.size() && i < shown; ++i)
        std::fprintf(stderr, "warning: %s\n", warnings[i].c_str());
    if (warnings.size() > shown)
        std::fprintf(stderr, "warning: ... %zu more (run 'validate' for the full list)\n", warnings.size() - shown);
}

std::unique_ptr<std::ofstream> open_output(const std::string& path)
{
    auto out = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*out)
        throw InputError("cannot write file: " + path);
    return out;
}

void print_summary(const Solution& s, const Problem& p, const IncomeBuckets& g, bool timing)
{
    std::printf("solver     %s\n", s.solver_name.c_str());
    std::printf("budget     %.6g   cost %.6f   within_budget %s   feasible %s\n", p.budget(), s.plan.cost(),
                s.within_budget ? "yes" : "no", s.feasible ? "yes" : "no");
    std::printf("energy     %s\n", format_breakdown(s.breakdown).c_str());
    std::printf("full UE    D=%.10g R=%.10g\n", s.full.D, s.full.R);
    std::printf("groups     low=%.4f average=%.4f high=%.4f\n", g.low, g.average, g.high);
    if (timing)
        std::printf("wall_time  %.3f s   evaluations %llu\n", s.wall_time_s,
                    static_cast<unsigned long long>(s.evaluations));
    std::printf("link  recovery  headroom\n");
    const auto head = p.headroom();
    for (std::size_t i = 0; i < s.plan.links.size(); ++i)
        std::printf("%4d  %8.4f  %8.4f\n", s.plan.links[i], s.plan.recovery[i], head[i]);
}

int cmd_solve(const InputOptions& in, const SolverOptions& so, std::optional<double> budget, std::optional<double> mu,
              std::uint64_t seed, int jobs, const std::string& out_path, const std::string& format,
              const std::string& trace_path)
{
    const Problem base = load_problem(in);
    print_warnings(base.warnings());
    const auto solver = parse_solver(so.solver);
    RunSpec spec{*solver, budget.value_or(base.budget()), mu.value_or(base.scenario().mu), seed};
    SolverSettings settings = make_settings(so, jobs);
    const bool timing = !in.no_timing;

    Scenario sc = base.scenario();
    sc.budget = spec.budget;
    sc.mu = spec.mu;
    const Problem problem = base.with_scenario(sc);

    Solution s;
    if (!trace_path.empty() && spec.solver == SolverKind::SA) {
        settings.sa.seed = seed;
        AnnealResult r = run_sa(problem, settings.sa);
        auto out = open_output(trace_path);
        *out << "step temperature current_H best_H\n";
        for (const AnnealTraceRow& t : r.trace) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%llu %.17g %.17g %.17g\n", static_cast<unsigned long long>(t.step),
                          t.temperature, t.current_H, t.best_H);
            *out << buf;
        }
        s = std::move(r.solution);
    } else if (!trace_path.empty() && spec.solver == SolverKind::GA) {
        settings.ga.seed = seed;
        GAResult r = run_ga(problem, settings.ga);
        auto out = open_output(trace_path);
        *out << "generation best_fitness mean_fitness elapsed_s\n";
        for (const GATraceRow& t : r.trace) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%d %.17g %.17g %.17g\n", t.generation, t.best_fitness, t.mean_fitness,
                          timing ? t.elapsed_s : 0.0);
            *out << buf;
        }
        s = std::move(r.solution);
    } else {
        s = solve_once(base, spec, settings);
    }

    const auto classes = classify_links_by_income(problem.network(), problem.scenario());
    const ReportRow row = make_row(spec, s, classes);
    print_summary(s, problem, row.groups, timing);
    if (!out_path.empty()) {
        auto out = open_output(out_path);
        RowWriter w(*out, *parse_format(format), timing);
        w.write(row);
    }
    return s.within_budget ? kOk : kInfeasible;
}

std::vector<SolverKind> parse_solvers(const std::vector<std::string>& names)
{
    std::vector<SolverKind> out;
    for (const std::string& n : names) {
        const auto s = parse_solver(n);
        if (!s)
            throw InputError("unknown solver '" + n + "'");
        out.push_back(*s);
    }
    return out;
}

int cmd_sweep(const InputOptions& in, const SolverOptions& so, SweepSpec spec, const std::vector<std::string>& solvers,
              int jobs, const std::string& out_path, const std::string& format)
{
    const Problem base = load_problem(in);
    print_warnings(base.warnings());
    spec.solvers = parse_solvers(solvers);
    spec.check();
    const SolverSettings settings = make_settings(so, 1);
    std::unique_ptr<std::ofstream> file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file = open_output(out_path);
        out = file.get();
    }
    RowWriter writer(*out, *parse_format(format), !in.no_timing);
    const std::size_t total = spec.cells().size();
    std::size_t written = 0;
    bool any_failed = false;
    sweep(base, spec, settings, jobs, [&](const ReportRow& row) {
        writer.write(row);
        ++written;
        any_failed = any_failed || !row.error.empty();
        std::fprintf(stderr, "[%zu/%zu] %s B=%g mu=%g seed=%llu %s\n", written, total, row.solver.c_str(), row.budget,
                     row.mu, static_cast<unsigned long long>(row.seed),
                     row.error.empty() ? "" : ("error: " + row.error).c_str());
    });
    return any_failed ? kInfeasible : kOk;
}

int cmd_assign(const InputOptions& in, bool damaged, int max_iter, double gap, const std::string& out_path)
{
    const Problem p = load_problem(in);
    const std::vector<double> caps = damaged ? p.scenario().residual_capacities(p.network()) : p.network().capacities();
    UEParams ue;
    ue.max_iterations = max_iter;
    ue.gap_tolerance = gap;
    try {
        const AssignmentResult r = solve_ue(p.network(), p.demand(), caps, ue, p.bpr());
        std::printf("tstt %.10g\nrelative_gap %.3e\niterations %d\nconverged %s\nconservation_residual %.3e\n", r.tstt,
                    r.relative_gap, r.iterations, r.converged ? "yes" : "no",
                    conservation_residual(p.network(), p.demand(), r.flows));
        if (!out_path.empty()) {
            auto out = open_output(out_path);
            *out << format_flows(r);
        }
        return r.converged ? kOk : kInfeasible;
    } catch (const UnreachableError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInfeasible;
    }
}

int cmd_report(const std::string& in_path, bool compare, const std::string& plot_path)
{
    std::ifstream in(in_path);
    if (!in)
        throw InputError("cannot open file: " + in_path);
    const std::vector<ReportRow> rows = read_report_csv(in);
    if (compare) {
        try {
            std::fputs(compare_report(rows).text().c_str(), stdout);
        } catch (const std::invalid_argument& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return kInputError;
        }
    } else {
        std::printf("%zu rows\n", rows.size());
    }
    if (!plot_path.empty()) {
        auto out = open_output(plot_path);
        write_plot_rows(*out, rows);
    }
    return kOk;
}

int cmd_validate(const InputOptions& in)
{
    const Network net = in.network.empty() ? builtin_sioux_falls() : parse_network(read_file(in.network));
    const DemandTable demand = in.trips.empty() ? (in.network.empty() ? default_sioux_falls_demand()
                                                                      : synthetic_symmetric_demand(net, 1.0))
                                                : parse_trips(read_file(in.trips), net.zone_count());
    if (in.scenario.empty() && !in.network.empty())
        throw InputError("--scenario is required with a custom --network");
    const Scenario sc = in.scenario.empty() ? default_sioux_falls_scenario() : load_scenario(read_file(in.scenario), net);
    const ValidationReport rep = validate(net, demand, sc);
    for (const std::string& e : rep.errors)
        std::printf("error: %s\n", e.c_str());
    for (const std::string& w : rep.warnings)
        std::printf("warning: %s\n", w.c_str());
    std::printf("%s: %zu links, %d zones, %zu damaged, %zu errors, %zu warnings\n", rep.ok() ? "ok" : "invalid",
                net.link_count(), net.zone_count(), sc.damaged.size(), rep.errors.size(), rep.warnings.size());
    return rep.ok() ? kOk : kInputError;
}

int cmd_export(const std::string& dir)
{
    std::filesystem::create_directories(dir);
    const Network net = builtin_sioux_falls();
    *open_output(dir + "/SiouxFalls_net.tntp") << serialize_network(net);
    *open_output(dir + "/SiouxFalls_trips.tntp") << serialize_trips(default_sioux_falls_demand());
    *open_output(dir + "/SiouxFalls_scenario.yaml") << serialize_scenario(default_sioux_falls_scenario());
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Budget-constrained, equity-aware restoration of damaged road networks"};
    app.require_subcommand(1);

    InputOptions in;
    SolverOptions so;
    std::optional<double> budget;
    std::optional<double> mu;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::string out_path;
    std::string format = "csv";
    std::string trace_path;

    auto* solve = app.add_subcommand("solve", "run one solver on one scenario");
    add_input_options(solve, in);
    add_solver_options(solve, so);
    solve->add_option("--solver", so.solver, "solver")->check(CLI::IsMember({"sa", "ga", "greedy", "oracle", "cqm"}));
    solve->add_option("--budget", budget, "override the scenario budget")->check(CLI::NonNegativeNumber);
    solve->add_option("--mu", mu, "override the scenario mu")->check(CLI::Range(0.0, 1.0));
    solve->add_option("--seed", seed, "rng seed");
    solve->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    solve->add_option("--out", out_path, "write the report row here");
    solve->add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));
    solve->add_option("--trace", trace_path, "write the sa energy trace or the ga fitness trace here");

    SweepSpec spec;
    std::vector<std::string> solvers{"sa"};
    auto* sweep_cmd = app.add_subcommand("sweep", "Cartesian product of budgets, mus, solvers and seeds");
    add_input_options(sweep_cmd, in);
    add_solver_options(sweep_cmd, so);
    sweep_cmd->add_option("--budgets", spec.budgets, "budget levels")->delimiter(',');
    sweep_cmd->add_option("--mus", spec.mus, "mu values")->delimiter(',');
    sweep_cmd->add_option("--solvers", solvers, "solvers")->delimiter(',');
    sweep_cmd->add_option("--seeds", spec.seeds, "seeds")->delimiter(',');
    sweep_cmd->add_option("--jobs", jobs, "cells run in parallel")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--out", out_path, "report file (default: stdout)");
    sweep_cmd->add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));

    bool damaged = false;
    int max_iter = 500;
    double gap = 1e-4;
    auto* assign = app.add_subcommand("assign", "user equilibrium only");
    add_input_options(assign, in);
    assign->add_flag("--damaged", damaged, "use the scenario's residual capacities");
    assign->add_option("--max-iter", max_iter, "Frank-Wolfe iteration cap")->check(CLI::PositiveNumber);
    assign->add_option("--gap", gap, "relative gap tolerance")->check(CLI::PositiveNumber);
    assign->add_option("--out", out_path, "write 'link flow time' rows here");

    std::string in_path;
    bool compare = false;
    std::string plot_path;
    auto* report = app.add_subcommand("report", "summarize a CSV report");
    report->add_option("--in", in_path, "CSV report from solve or sweep")->required();
    report->add_flag("--compare", compare, "per-budget solver comparison");
    report->add_option("--plot", plot_path, "write long-format plot rows here");

    auto* validate_cmd = app.add_subcommand("validate", "check network, trips and scenario");
    add_input_options(validate_cmd, in);

    std::string export_dir = "data";
    auto* export_cmd = app.add_subcommand("export", "write the built-in dataset as files");
    export_cmd->add_option("--dir", export_dir, "target directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*solve)
            return cmd_solve(in, so, budget, mu, seed, jobs, out_path, format, trace_path);
        if (*sweep_cmd)
            return cmd_sweep(in, so, spec, solvers, jobs, out_path, format);
        if (*assign)
            return cmd_assign(in, damaged, max_iter, gap, out_path);
        if (*report)
            return cmd_report(in_path, compare, plot_path);
        if (*validate_cmd)
            return cmd_validate(in);
        if (*export_cmd)
            return cmd_export(export_dir);
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInputError;
    } catch (const CqmInfeasibleError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInfeasible;
    } catch (const CqmError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInputError;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInputError;
    }
    return kOk;
}
