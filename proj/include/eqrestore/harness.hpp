#pragma once

#include "eqrestore/anneal.hpp"
#include "eqrestore/cqm.hpp"
#include "eqrestore/ga.hpp"
#include "eqrestore/problem.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace eqr {

enum class SolverKind { SA, GA, Greedy, Oracle, Cqm };

std::optional<SolverKind> parse_solver(std::string_view s);
std::string_view to_string(SolverKind s);

struct SolverSettings {
    AnnealConfig sa;
    GAConfig ga;
    double greedy_step = 1.0;
    int oracle_grid = 6;
    CqmClientOptions cqm;
};

struct RunSpec {
    SolverKind solver = SolverKind::SA;
    double budget = 0.0;
    double mu = 0.2;
    std::uint64_t seed = 1;
};

struct IncomeBuckets {
    double low = 0.0;
    double average = 0.0;
    double high = 0.0;

    double total() const { return low + average + high; }
};

/// Restored capacity summed per income class of the damaged links.
IncomeBuckets aggregate_by_income(const RestorationPlan& plan, const std::map<int, IncomeClass>& classes);

struct ReportRow {
    std::string solver;
    double budget = 0.0;
    double mu = 0.0;
    std::uint64_t seed = 0;
    /// Terms of the energy the solver minimized.
    double D = 0.0;
    double E = 0.0;
    double R = 0.0;
    double H = 0.0;
    /// Deficiency and resilience from a fresh equilibrium at the plan.
    double full_D = 0.0;
    double full_R = 0.0;
    double cost = 0.0;
    double wall_time_s = 0.0;
    IncomeBuckets groups;
    bool feasible = false;
    bool within_budget = false;
    std::uint64_t evaluations = 0;
    std::vector<std::pair<int, double>> plan;
    std::string error;  // non-empty when the cell failed
};

ReportRow make_row(const RunSpec& spec, const Solution& s, const std::map<int, IncomeClass>& classes);

/// Applies budget and mu to the base problem and runs one solver. Timing
/// covers the solver call only.
Solution solve_once(const Problem& base, const RunSpec& spec, const SolverSettings& settings);

struct SweepSpec {
    std::vector<double> budgets{75.0, 150.0, 225.0, 300.0};
    std::vector<double> mus{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<SolverKind> solvers{SolverKind::SA};
    std::vector<std::uint64_t> seeds{1};

    /// Throws std::invalid_argument on empty lists or negative budgets.
    void check() const;
    /// Cartesian product in canonical order: budget, mu, solver, seed.
    std::vector<RunSpec> cells() const;
};

/// Runs every cell on up to `jobs` threads. `sink` receives rows in
/// canonical order as soon as all earlier cells are done. A failing cell
/// yields a row with `error` set.
std::vector<ReportRow> sweep(const Problem& base, const SweepSpec& spec, const SolverSettings& settings, int jobs,
                             const std::function<void(const ReportRow&)>& sink = {});

enum class ReportFormat { Csv, Json };

std::optional<ReportFormat> parse_format(std::string_view s);

/// Streams rows as CSV (with header) or JSON lines. With timing off,
/// wall_time_s is written as 0 so repeated runs produce identical bytes.
class RowWriter {
public:
    RowWriter(std::ostream& out, ReportFormat format, bool timing);
    void write(const ReportRow& row);

private:
    std::ostream& out_;
    ReportFormat format_;
    bool timing_;
    bool header_done_ = false;
};

std::vector<ReportRow> read_report_csv(std::istream& in);

struct CompareEntry {
    double budget = 0.0;
    std::string solver;
    double best_H = 0.0;
    double cost = 0.0;           // of the best-H row
    double utilization = 0.0;    // cost / budget
    double mean_wall_time_s = 0.0;
    std::size_t rows = 0;
    bool underspent = false;     // utilization below the threshold
};

struct CompareSummary {
    std::vector<CompareEntry> entries;  // sorted by budget, then solver name
    std::string text() const;
};

/// Per-budget best H, its cost and mean wall time per solver. Throws
/// std::invalid_argument("need two solvers") with fewer than two solvers.
CompareSummary compare_report(const std::vector<ReportRow>& rows, double utilization_threshold = 0.97);

/// Long-format plot data: solver,mu,budget,variable,group,value.
void write_plot_rows(std::ostream& out, const std::vector<ReportRow>& rows);

}  // namespace eqr
