#include "eqrestore/network.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace eqr {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::string_view strip_comment(std::string_view s)
{
    const auto pos = s.find_first_of("#~");
    return pos == std::string_view::npos ? s : s.substr(0, pos);
}

std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

std::vector<std::string_view> tokens(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == ';' || s[i] == ','))
            ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != ';' && s[j] != ',')
            ++j;
        if (j > i)
            out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

bool parse_double(std::string_view tok, double& out)
{
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (first != last && *first == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_int(std::string_view tok, int& out)
{
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size();
}

struct Metadata {
    int zones = 0;
    int links = -1;
};

/// Handles `<KEY> value` lines; returns true when the line was metadata.
bool read_metadata(std::string_view line, Metadata& meta, int line_no)
{
    if (line.empty() || line.front() != '<')
        return false;
    const auto close = line.find('>');
    if (close == std::string_view::npos)
        throw InputError("unterminated metadata tag", line_no);
    const std::string_view key = line.substr(1, close - 1);
    const std::string_view value = trim(line.substr(close + 1));
    int v = 0;
    if (key == "NUMBER OF ZONES" || key == "NUMBER OF NODES") {
        if (!parse_int(value, v) || v < 1)
            throw InputError("bad zone count", line_no);
        if (key == "NUMBER OF ZONES" || meta.zones == 0)
            meta.zones = std::max(meta.zones, v);
    } else if (key == "NUMBER OF LINKS") {
        if (!parse_int(value, v) || v < 0)
            throw InputError("bad link count", line_no);
        meta.links = v;
    }
    return true;
}

// Shortest text that parses back to the same double.
std::string fmt_double(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

Network parse_network(std::string_view text, bool allow_parallel)
{
    Metadata meta;
    std::vector<Link> links;
    int max_zone = 0;
    int line_no = 0;
    for (std::string_view raw : split_lines(text)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (read_metadata(line, meta, line_no))
            continue;
        line = trim(strip_comment(line));
        if (line.empty())
            continue;
        const auto toks = tokens(line);
        if (toks.size() < 4)
            throw InputError("malformed row, expected 'from to capacity free_flow_time'", line_no);
        Link l;
        if (!parse_int(toks[0], l.from) || !parse_int(toks[1], l.to) || !parse_double(toks[2], l.capacity) ||
            !parse_double(toks[3], l.free_flow_time))
            throw InputError("malformed row", line_no);
        if (l.capacity <= 0.0)
            throw InputError("non-positive capacity", line_no);
        if (l.free_flow_time <= 0.0)
            throw InputError("non-positive free-flow time", line_no);
        if (l.from < 1 || l.to < 1)
            throw InputError("zone ids start at 1", line_no);
        l.id = static_cast<int>(links.size()) + 1;
        max_zone = std::max({max_zone, l.from, l.to});
        links.push_back(l);
    }
    if (links.empty())
        throw InputError("no links");
    if (meta.links >= 0 && meta.links != static_cast<int>(links.size()))
        throw InputError("header declares " + std::to_string(meta.links) + " links, found " +
                         std::to_string(links.size()));
    const int zones = meta.zones > 0 ? meta.zones : max_zone;
    if (max_zone > zones)
        throw InputError("zone id " + std::to_string(max_zone) + " exceeds declared zone count");
    return Network(zones, std::move(links), allow_parallel);
}

std::string serialize_network(const Network& net)
{
    std::ostringstream os;
    os << "<NUMBER OF ZONES> " << net.zone_count() << "\n";
    os << "<NUMBER OF LINKS> " << net.link_count() << "\n";
    os << "<END OF METADATA>\n";
    os << "# from\tto\tcapacity\tfree_flow_time\n";
    for (const Link& l : net.links())
        os << l.from << '\t' << l.to << '\t' << fmt_double(l.capacity) << '\t' << fmt_double(l.free_flow_time)
           << "\n";
    return os.str();
}

DemandTable parse_trips(std::string_view text, int zone_count)
{
    Metadata meta;
    DemandTable demand(zone_count);
    int origin = 0;
    int line_no = 0;
    for (std::string_view raw : split_lines(text)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (read_metadata(line, meta, line_no)) {
            if (meta.zones > 0 && meta.zones != zone_count)
                throw InputError("trips declare " + std::to_string(meta.zones) + " zones, network has " +
                                     std::to_string(zone_count),
                                 line_no);
            continue;
        }
        line = trim(strip_comment(line));
        if (line.empty())
            continue;
        if (line.starts_with("Origin")) {
            if (!parse_int(trim(line.substr(6)), origin))
                throw InputError("malformed Origin line", line_no);
            if (origin < 1 || origin > zone_count)
                throw InputError("origin " + std::to_string(origin) + " out of range", line_no);
            continue;
        }
        if (origin == 0)
            throw InputError("demand entry before any Origin block", line_no);
        // entries: "s : value;" repeated
        std::string_view rest = line;
        while (!rest.empty()) {
            const auto colon = rest.find(':');
            if (colon == std::string_view::npos)
                throw InputError("expected 'destination : demand;'", line_no);
            const auto semi = rest.find(';', colon);
            const std::string_view dest_tok = trim(rest.substr(0, colon));
            const std::string_view val_tok =
                trim(semi == std::string_view::npos ? rest.substr(colon + 1) : rest.substr(colon + 1, semi - colon - 1));
            int dest = 0;
            double value = 0.0;
            if (!parse_int(dest_tok, dest) || !parse_double(val_tok, value))
                throw InputError("malformed demand entry", line_no);
            if (dest < 1 || dest > zone_count)
                throw InputError("destination " + std::to_string(dest) + " out of range", line_no);
            if (value < 0.0)
                throw InputError("negative demand", line_no);
            if (dest == origin && value != 0.0)
                throw InputError("self-demand must be zero", line_no);
            demand.set(origin, dest, value);
            rest = semi == std::string_view::npos ? std::string_view{} : trim(rest.substr(semi + 1));
        }
    }
    return demand;
}

std::string serialize_trips(const DemandTable& demand)
{
    std::ostringstream os;
    os << "<NUMBER OF ZONES> " << demand.zone_count() << "\n";
    os << "<TOTAL OD FLOW> " << fmt_double(demand.total()) << "\n";
    os << "<END OF METADATA>\n";
    for (int r = 1; r <= demand.zone_count(); ++r) {
        os << "\nOrigin " << r << "\n";
        int on_line = 0;
        for (int s = 1; s <= demand.zone_count(); ++s) {
            const double q = demand.at(r, s);
            if (q == 0.0)
                continue;
            os << std::setw(5) << s << " : " << fmt_double(q) << ";";
            if (++on_line == 5) {
                os << "\n";
                on_line = 0;
            }
        }
        if (on_line != 0)
            os << "\n";
    }
    return os.str();
}

// Scenario ------------------------------------------------------------------------

namespace {

/// Looks up `a.b` either as a literal flat key or as nested maps.
YAML::Node lookup(const YAML::Node& root, const std::string& dotted)
{
    if (root[dotted])
        return root[dotted];
    const auto dot = dotted.find('.');
    if (dot == std::string::npos)
        return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node parent = root[dotted.substr(0, dot)];
    if (!parent || !parent.IsMap())
        return YAML::Node(YAML::NodeType::Undefined);
    return lookup(parent, dotted.substr(dot + 1));
}

double number(const YAML::Node& n, const std::string& what)
{
    try {
        return n.as<double>();
    } catch (const YAML::Exception&) {
        throw InputError("scenario: '" + what + "' must be a number");
    }
}

double optional_number(const YAML::Node& root, const std::string& key, double fallback)
{
    const YAML::Node n = lookup(root, key);
    return n ? number(n, key) : fallback;
}

}  // namespace

Scenario load_scenario(std::string_view text, const Network& net)
{
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw InputError(std::string("scenario: ") + e.what(), e.mark.line + 1);
    }
    if (!root.IsMap())
        throw InputError("scenario: expected a key-value document");

    Scenario sc;
    const YAML::Node budget = lookup(root, "budget");
    if (!budget)
        throw InputError("scenario: missing 'budget'");
    sc.budget = number(budget, "budget");
    sc.mu = optional_number(root, "mu", 0.2);
    sc.bpr_alpha = optional_number(root, "bpr.alpha", 0.15);
    sc.bpr_beta = optional_number(root, "bpr.beta", 4.0);
    sc.lambda1 = optional_number(root, "penalty.lambda1", 1e3);
    sc.lambda2 = optional_number(root, "penalty.lambda2", 1e3);
    sc.levels.low = optional_number(root, "income_levels.low", sc.levels.low);
    sc.levels.average = optional_number(root, "income_levels.average", sc.levels.average);
    sc.levels.high = optional_number(root, "income_levels.high", sc.levels.high);

    const YAML::Node damaged = lookup(root, "damaged");
    if (damaged) {
        if (!damaged.IsSequence())
            throw InputError("scenario: 'damaged' must be a list of {link, residual}");
        std::set<int> seen;
        for (const YAML::Node& d : damaged) {
            if (!d.IsMap() || !d["link"])
                throw InputError("scenario: damaged entry needs 'link'");
            const int link = static_cast<int>(number(d["link"], "link"));
            if (!net.has_link(link))
                throw InputError("scenario: unknown link id " + std::to_string(link));
            if (!seen.insert(link).second)
                throw InputError("scenario: link " + std::to_string(link) + " listed twice");
            const double cap = net.link(link).capacity;
            double residual = 0.0;
            if (d["residual"])
                residual = number(d["residual"], "residual");
            else if (d["max_recovery"])
                residual = std::max(0.0, cap - number(d["max_recovery"], "max_recovery"));
            else
                throw InputError("scenario: link " + std::to_string(link) + " needs 'residual' or 'max_recovery'");
            if (residual < 0.0)
                throw InputError("scenario: link " + std::to_string(link) + " has negative residual capacity");
            if (residual > cap)
                throw InputError("scenario: link " + std::to_string(link) + " residual capacity exceeds C_a (" +
                                 fmt_double(cap) + ")");
            sc.damaged.push_back(DamagedLink{link, residual});
        }
    }

    const YAML::Node incomes = lookup(root, "incomes");
    if (!incomes || !incomes.IsMap())
        throw InputError("scenario: missing 'incomes' map");
    sc.incomes.assign(static_cast<std::size_t>(net.zone_count()), 0.0);
    for (const auto& kv : incomes) {
        const int zone = static_cast<int>(number(kv.first, "zone id"));
        if (zone < 1 || zone > net.zone_count())
            throw InputError("scenario: unknown zone id " + std::to_string(zone));
        const std::string value = kv.second.as<std::string>();
        double income = 0.0;
        if (value == "low")
            income = sc.levels.low;
        else if (value == "average")
            income = sc.levels.average;
        else if (value == "high")
            income = sc.levels.high;
        else
            income = number(kv.second, "income of zone " + std::to_string(zone));
        if (!(income > 0.0))
            throw InputError("scenario: income for zone " + std::to_string(zone) + " must be positive");
        sc.incomes[static_cast<std::size_t>(zone - 1)] = income;
    }
    for (int z = 1; z <= net.zone_count(); ++z)
        if (sc.incomes[static_cast<std::size_t>(z - 1)] == 0.0)
            throw InputError("scenario: income missing for zone " + std::to_string(z));
    return sc;
}

std::string serialize_scenario(const Scenario& sc)
{
    std::ostringstream os;
    os << "budget: " << fmt_double(sc.budget) << "\n";
    os << "mu: " << fmt_double(sc.mu) << "\n";
    os << "bpr:\n  alpha: " << fmt_double(sc.bpr_alpha) << "\n  beta: " << fmt_double(sc.bpr_beta) << "\n";
    os << "penalty:\n  lambda1: " << fmt_double(sc.lambda1) << "\n  lambda2: " << fmt_double(sc.lambda2) << "\n";
    os << "income_levels:\n  low: " << fmt_double(sc.levels.low) << "\n  average: " << fmt_double(sc.levels.average)
       << "\n  high: " << fmt_double(sc.levels.high) << "\n";
    os << "damaged:\n";
    for (const DamagedLink& d : sc.damaged)
        os << "  - {link: " << d.link << ", residual: " << fmt_double(d.residual) << "}\n";
    os << "incomes:\n";
    for (std::size_t z = 0; z < sc.incomes.size(); ++z) {
        const double v = sc.incomes[z];
        os << "  " << z + 1 << ": ";
        if (v == sc.levels.low)
            os << "low";
        else if (v == sc.levels.average)
            os << "average";
        else if (v == sc.levels.high)
            os << "high";
        else
            os << fmt_double(v);
        os << "\n";
    }
    return os.str();
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace eqr
