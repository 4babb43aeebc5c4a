#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eqr {

/// Capacities at or below this value (10^3 veh/h) are treated as absent for routing.
inline constexpr double kCapacityEpsilon = 1e-3;

/// Raised for malformed or inconsistent input data. Carries the 1-based line
/// number when the problem can be pinned to a line (0 otherwise).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what, int line = 0);
    int line() const noexcept { return line_; }

private:
    int line_;
};

struct Link {
    int id = 0;    // 1-based, dense
    int from = 0;  // zone ids, 1-based
    int to = 0;
    double capacity = 0.0;        // 10^3 veh/h
    double free_flow_time = 0.0;  // minutes

    bool operator==(const Link&) const = default;
};

/// Directed road network over zones 1..zone_count. Immutable once built.
class Network {
public:
    Network() = default;
    /// Validates the link list: endpoints in range, ids dense in row order,
    /// positive capacity and free-flow time. Parallel links (same from/to)
    /// are rejected unless `allow_parallel`.
    Network(int zone_count, std::vector<Link> links, bool allow_parallel = false);

    int zone_count() const noexcept { return zone_count_; }
    std::size_t link_count() const noexcept { return links_.size(); }
    std::span<const Link> links() const noexcept { return links_; }
    const Link& link(int id) const;
    bool has_link(int id) const noexcept { return id >= 1 && id <= static_cast<int>(links_.size()); }

    /// Zero-based link indices leaving `zone`, ascending by link id.
    std::span<const int> outgoing(int zone) const;

    double total_capacity() const noexcept;
    std::vector<double> capacities() const;

    bool operator==(const Network& other) const
    {
        return zone_count_ == other.zone_count_ && links_ == other.links_;
    }

private:
    int zone_count_ = 0;
    std::vector<Link> links_;
    std::vector<int> out_offsets_;
    std::vector<int> out_links_;
};

/// Dense origin-destination demand matrix, zones 1-based. Units match link capacity.
class DemandTable {
public:
    DemandTable() = default;
    explicit DemandTable(int zone_count);

    int zone_count() const noexcept { return zone_count_; }
    double at(int origin, int destination) const;
    void set(int origin, int destination, double value);
    double total() const noexcept;
    double origin_total(int origin) const;

private:
    int zone_count_ = 0;
    std::vector<double> values_;
};

enum class IncomeClass { Low = 0, Average = 1, High = 2 };

std::string_view to_string(IncomeClass c);

/// Normalized income attached to each class.
struct IncomeLevels {
    double low = 0.6;
    double average = 1.0;
    double high = 1.5;

    double value(IncomeClass c) const;
    /// Class whose level is nearest to `income`; ties go to the lower class.
    IncomeClass classify(double income) const;
};

struct DamagedLink {
    int link = 0;
    double residual = 0.0;  // C_a^0
};

struct Scenario {
    std::vector<DamagedLink> damaged;  // gene order for the solvers
    std::vector<double> incomes;       // index zone-1
    IncomeLevels levels;
    double budget = 0.0;
    double mu = 0.2;
    double bpr_alpha = 0.15;
    double bpr_beta = 4.0;
    double lambda1 = 1e3;
    double lambda2 = 1e3;

    double income(int zone) const { return incomes.at(static_cast<std::size_t>(zone - 1)); }
    /// Capacity vector of the damaged, unrestored network.
    std::vector<double> residual_capacities(const Network& net) const;
    /// Headroom C_a - C_a^0 per damaged link, in `damaged` order.
    std::vector<double> headroom(const Network& net) const;
};

// Parsing -------------------------------------------------------------------

Network parse_network(std::string_view text, bool allow_parallel = false);
std::string serialize_network(const Network& net);

DemandTable parse_trips(std::string_view text, int zone_count);
std::string serialize_trips(const DemandTable& demand);

/// YAML (or JSON) scenario document; ids are checked against `net`.
Scenario load_scenario(std::string_view text, const Network& net);
std::string serialize_scenario(const Scenario& sc);

std::string read_file(const std::string& path);

// Built-in Sioux Falls data ---------------------------------------------------

Network builtin_sioux_falls();

/// The 25 damaged links with their maximum recovery capacity, in table order.
std::span<const std::pair<int, double>> sioux_falls_max_recovery();

/// Per-zone income classes used by the default scenario.
std::array<IncomeClass, 24> sioux_falls_income_classes();

Scenario default_sioux_falls_scenario(double budget = 75.0);

/// Deterministic symmetric gravity-style demand on free-flow travel times.
DemandTable synthetic_symmetric_demand(const Network& net, double scale);
/// Synthetic demand scaled to a total of 360.6, the total OD flow of the
/// standard Sioux Falls trips table.
DemandTable default_sioux_falls_demand();

// Classification and validation -----------------------------------------------

/// Class of every damaged link: the class of its lower-income endpoint.
std::map<int, IncomeClass> classify_links_by_income(const Network& net, const Scenario& sc);

struct ValidationReport {
    std::vector<std::string> errors;
    /// Conditions that do not block solving, e.g. OD pairs cut by damage
    /// that restoration can reconnect.
    std::vector<std::string> warnings;

    bool ok() const noexcept { return errors.empty(); }
};

ValidationReport validate(const Network& net, const DemandTable& demand, const Scenario& sc);

/// Zones reachable from `origin` using only links whose capacity exceeds kCapacityEpsilon.
std::vector<bool> reachable_from(const Network& net, std::span<const double> capacities, int origin);

}  // namespace eqr
