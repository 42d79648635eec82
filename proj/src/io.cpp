#include "ocirc/io.hpp"

#include "ocirc/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace ocirc {

std::string format_double(double v) {
    char buf[40];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc())
        return "nan";
    return std::string(buf, end);
}

namespace {

bool parse_number(const std::string& cell, double& out) {
    const char* b = cell.data();
    const char* e = b + cell.size();
    while (b < e && (*b == ' ' || *b == '\t'))
        ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r'))
        --e;
    if (b == e)
        return false;
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

} // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          std::span<const std::string> columns,
                          const std::string& meta) {
    if (columns.size() != static_cast<std::size_t>(traj.dim))
        throw std::invalid_argument("write_trajectory_csv: column count mismatch");
    if (!meta.empty())
        os << "# " << meta << "\n";
    os << "tau";
    for (const auto& c : columns)
        os << ',' << c;
    os << ",event\n";
    std::size_t ev = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << format_double(traj.times[i]);
        for (double v : traj.state(i))
            os << ',' << format_double(v);
        os << ',';
        if (ev < traj.events.size() && traj.events[ev].time == traj.times[i]) {
            os << traj.events[ev].index;
            ++ev;
        }
        os << '\n';
    }
}

ParsedTrajectory read_trajectory_csv(std::istream& is) {
    ParsedTrajectory out;
    std::string line;
    long lineno = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        auto cells = split_csv(line);
        if (!header_seen) {
            if (cells.size() < 3 || cells.front() != "tau" ||
                cells.back() != "event")
                throw IngestError("line " + std::to_string(lineno) +
                                  ": expected header tau,<columns...>,event");
            out.columns.assign(cells.begin() + 1, cells.end() - 1);
            out.traj.dim = static_cast<int>(out.columns.size());
            header_seen = true;
            continue;
        }
        if (cells.size() != out.columns.size() + 2)
            throw IngestError("line " + std::to_string(lineno) +
                              ": wrong number of cells");
        double t;
        if (!parse_number(cells[0], t))
            throw IngestError("line " + std::to_string(lineno) +
                              ": non-numeric time");
        out.traj.times.push_back(t);
        for (std::size_t c = 1; c + 1 < cells.size(); ++c) {
            double v;
            if (!parse_number(cells[c], v))
                throw IngestError("line " + std::to_string(lineno) +
                                  ": non-numeric state cell");
            out.traj.states.push_back(v);
        }
        const std::string& evcell = cells.back();
        if (!evcell.empty() && evcell != "\r") {
            double idx;
            if (!parse_number(evcell, idx))
                throw IngestError("line " + std::to_string(lineno) +
                                  ": non-numeric event index");
            out.traj.events.push_back({t, static_cast<int>(idx), 0});
        }
    }
    if (!header_seen)
        throw IngestError("missing header row");
    return out;
}

nlohmann::json trajectory_to_json(const Trajectory& traj,
                                  std::span<const std::string> columns,
                                  const nlohmann::json& header) {
    nlohmann::json j;
    j["header"] = header;
    j["columns"] = std::vector<std::string>(columns.begin(), columns.end());
    j["times"] = traj.times;
    auto& states = j["states"] = nlohmann::json::array();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        auto s = traj.state(i);
        states.push_back(std::vector<double>(s.begin(), s.end()));
    }
    auto& events = j["events"] = nlohmann::json::array();
    for (const auto& ev : traj.events)
        events.push_back({{"time", ev.time},
                          {"index", ev.index},
                          {"direction", ev.direction}});
    return j;
}

nlohmann::json to_json(const EquilibriumReport& rep) {
    nlohmann::json j;
    j["y0"] = rep.y0;
    j["mu0"] = rep.mu0;
    j["trace"] = rep.trace;
    j["det"] = rep.det;
    j["discriminant"] = rep.discriminant;
    j["class"] = to_string(rep.cls);
    j["branch"] = to_string(rep.branch);
    return j;
}

nlohmann::json to_json(const RegimeReport& rep) {
    nlohmann::json j;
    j["regime"] = to_string(rep.regime);
    j["bifurcation_at_corner"] = to_string(rep.bifurcation_at_corner);
    if (rep.fold)
        j["fold"] = {{"y", rep.fold->y}, {"mu", rep.fold->mu}};
    else
        j["fold"] = nullptr;
    return j;
}

nlohmann::json to_json(const CycleReport& rep) {
    nlohmann::json j;
    j["converged"] = rep.converged;
    j["kind"] = to_string(rep.kind);
    if (rep.converged) {
        j["period"] = rep.period;
        j["y_min"] = rep.y_min;
        j["y_max"] = rep.y_max;
        j["mu_min"] = rep.mu_min;
        j["mu_max"] = rep.mu_max;
        j["section_value"] = rep.section_value;
    }
    if (rep.canard)
        j["canard"] = {{"onset_tau", rep.canard->onset_tau},
                       {"duration_slow", rep.canard->duration_slow},
                       {"max_distance", rep.canard->max_distance}};
    else
        j["canard"] = nullptr;
    return j;
}

nlohmann::json to_json(const ExcursionStats& stats) {
    nlohmann::json j;
    j["count_large"] = stats.count_large;
    j["threshold"] = stats.threshold;
    j["min_gap"] = stats.min_gap;
    j["mean"] = stats.mean;
    auto& eps = j["episodes"] = nlohmann::json::array();
    for (const auto& ep : stats.episodes)
        eps.push_back({{"t_start", ep.t_start},
                       {"t_end", ep.t_end},
                       {"psi_min", ep.psi_min},
                       {"psi_max", ep.psi_max}});
    j["envelope_tau"] = stats.envelope_tau;
    j["envelope_amp"] = stats.envelope_amp;
    return j;
}

void write_sweep_csv(std::ostream& os, const BifurcationDiagram& diagram,
                     const std::string& meta) {
    if (!meta.empty())
        os << "# " << meta << "\n";
    os << "lambda,y_eq,mu_eq,eq_class,cycle_kind,period,y_min,y_max,mu_min,mu_max\n";
    for (const auto& pt : diagram.points) {
        os << format_double(pt.lambda);
        if (pt.error.empty()) {
            os << ',' << format_double(pt.eq.y0) << ','
               << format_double(pt.eq.mu0) << ',' << to_string(pt.eq.cls) << ','
               << to_string(pt.cycle.kind);
            if (pt.cycle.converged)
                os << ',' << format_double(pt.cycle.period) << ','
                   << format_double(pt.cycle.y_min) << ','
                   << format_double(pt.cycle.y_max) << ','
                   << format_double(pt.cycle.mu_min) << ','
                   << format_double(pt.cycle.mu_max);
            else
                os << ",,,,,";
        } else {
            os << ",,,,,,,,,"; // point failed; cells left empty
        }
        os << '\n';
    }
}

void write_forced_csv(std::ostream& os, const ForcedRunResult& run,
                      const ForcingSpec& f, const std::string& meta) {
    if (!meta.empty())
        os << "# " << meta << "\n";
    os << "tau,y,mu,A_tau,lambda_tau,psi\n";
    for (std::size_t i = 0; i < run.traj.size(); ++i) {
        const double tau = run.traj.times[i];
        const auto s = run.traj.state(i);
        os << format_double(tau) << ',' << format_double(s[0]) << ','
           << format_double(s[1]) << ',' << format_double(forcing_A(f, tau))
           << ',' << format_double(forcing_lambda(f, tau)) << ','
           << format_double(run.psi[i]) << '\n';
    }
}

ObliquitySeries parse_obliquity_csv(std::istream& is, double obl_min_sane,
                                    double obl_max_sane) {
    ObliquitySeries series;
    std::string line;
    long lineno = 0;
    bool first_content = true;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        auto cells = split_csv(line);
        if (cells.size() != 2)
            throw IngestError("line " + std::to_string(lineno) +
                              ": expected 2 columns");
        double t, obl;
        const bool numeric = parse_number(cells[0], t) && parse_number(cells[1], obl);
        if (!numeric) {
            if (first_content) { // header row
                first_content = false;
                continue;
            }
            throw IngestError("line " + std::to_string(lineno) +
                              ": non-numeric cell");
        }
        first_content = false;
        if (obl < obl_min_sane || obl > obl_max_sane)
            throw IngestError("line " + std::to_string(lineno) +
                              ": obliquity outside [" +
                              format_double(obl_min_sane) + ", " +
                              format_double(obl_max_sane) + "] degrees");
        series.time_kyr.push_back(t);
        series.obliquity_deg.push_back(obl);
    }
    if (series.time_kyr.size() < 2)
        throw IngestError("fewer than 2 data rows");
    const bool increasing = series.time_kyr[1] > series.time_kyr[0];
    for (std::size_t i = 1; i < series.time_kyr.size(); ++i) {
        const bool step_up = series.time_kyr[i] > series.time_kyr[i - 1];
        if (step_up != increasing || series.time_kyr[i] == series.time_kyr[i - 1])
            throw IngestError("time column is not strictly monotone (row " +
                              std::to_string(i + 1) + " of data)");
    }
    return series;
}

ForcingSpec obliquity_forcing(const ObliquitySeries& series, ForcingSpec base,
                              double tau_per_kyr) {
    const auto [mn_it, mx_it] = std::minmax_element(
        series.obliquity_deg.begin(), series.obliquity_deg.end());
    const double mn = *mn_it, mx = *mx_it;
    if (!(mx > mn))
        throw IngestError("constant obliquity column (zero range)");
    const std::size_t n = series.time_kyr.size();
    base.table_tau.resize(n);
    base.table_A.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        base.table_tau[i] = series.time_kyr[i] * tau_per_kyr;
        base.table_A[i] =
            base.A_bar +
            base.p * (2.0 * (series.obliquity_deg[i] - mn) / (mx - mn) - 1.0);
    }
    if (n >= 2 && base.table_tau[1] < base.table_tau[0]) {
        std::reverse(base.table_tau.begin(), base.table_tau.end());
        std::reverse(base.table_A.begin(), base.table_A.end());
    }
    base.validate();
    return base;
}

} // namespace ocirc
