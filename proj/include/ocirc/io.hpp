#pragma once

// CSV/JSON serialization of trajectories, reports and diagrams, plus
// obliquity-series ingestion. Floating-point values are written with 17
// significant digits so a parsed file reproduces the in-memory doubles
// exactly.

#include "ocirc/analysis.hpp"
#include "ocirc/core.hpp"
#include "ocirc/cycles.hpp"

#include <iosfwd>
#include <string>

#include <json.hpp>

namespace ocirc {

class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal form that round-trips the double ("%.17g" fallback).
std::string format_double(double v);

/// Writes `# key=value ...` metadata (when nonempty), a mandatory header row
/// `tau,<columns...>,event`, and one row per sample; the event cell carries
/// the switching-function index at event samples and is empty elsewhere.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          std::span<const std::string> columns,
                          const std::string& meta = {});

struct ParsedTrajectory {
    std::vector<std::string> columns;
    Trajectory traj; // no dense data
};

/// Parses the format written by write_trajectory_csv. Throws IngestError
/// (with a line number) on malformed input.
ParsedTrajectory read_trajectory_csv(std::istream& is);

nlohmann::json trajectory_to_json(const Trajectory& traj,
                                  std::span<const std::string> columns,
                                  const nlohmann::json& header);
nlohmann::json to_json(const EquilibriumReport& rep);
nlohmann::json to_json(const RegimeReport& rep);
nlohmann::json to_json(const CycleReport& rep);
nlohmann::json to_json(const ExcursionStats& stats);

/// CSV columns: lambda,y_eq,mu_eq,eq_class,cycle_kind,period,y_min,y_max,
/// mu_min,mu_max. Cycle cells are empty when no cycle was found or the
/// point failed.
void write_sweep_csv(std::ostream& os, const BifurcationDiagram& diagram,
                     const std::string& meta = {});

/// CSV columns: tau,y,mu,A_tau,lambda_tau,psi.
void write_forced_csv(std::ostream& os, const ForcedRunResult& run,
                      const ForcingSpec& f, const std::string& meta = {});

struct ObliquitySeries {
    std::vector<double> time_kyr;
    std::vector<double> obliquity_deg;
};

/// Parses a 2-column CSV (optional header row, detected by a non-numeric
/// first row). Validates: at least 2 rows, numeric cells, strictly monotone
/// time, obliquity within [obl_min_sane, obl_max_sane], nonconstant
/// obliquity. Throws IngestError with the offending line number.
ObliquitySeries parse_obliquity_csv(std::istream& is,
                                    double obl_min_sane = 20.0,
                                    double obl_max_sane = 26.0);

/// Builds the tabulated forcing A(tau) = A_bar + p (2 (obl - min)/(max - min) - 1)
/// with tau = time_kyr * tau_per_kyr (default 540/41, mapping one 41 kyr
/// obliquity period to the forcing period 2 pi / omega = 540). The lambda
/// sinusoid of `base` is kept.
ForcingSpec obliquity_forcing(const ObliquitySeries& series, ForcingSpec base,
                              double tau_per_kyr = 540.0 / 41.0);

} // namespace ocirc
