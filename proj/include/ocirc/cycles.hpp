#pragma once

// Numerical detection and measurement of periodic orbits of the reduced
// system via Poincare return maps, canard-segment classification, lambda
// sweeps producing bifurcation diagrams, and forced-run diagnostics.

#include "ocirc/analysis.hpp"
#include "ocirc/core.hpp"
#include "ocirc/integrate.hpp"

#include <array>
#include <functional>
#include <optional>

namespace ocirc {

class NoCrossingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SectionCrossing {
    double tau = 0.0;
    std::vector<double> state;
};

/// Crossings of fn(state) = 0 along a trajectory, localized on the dense
/// output by bisection. direction: +1 keeps crossings into fn >= 0, -1 into
/// fn < 0, 0 keeps both.
std::vector<SectionCrossing>
section_crossings(const Trajectory& traj,
                  const std::function<double(std::span<const double>)>& fn,
                  int direction);

struct PoincareResult {
    std::vector<SectionCrossing> crossings;
    bool used_fallback = false;    // section {mu = F(lambda), y > lambda}
    bool budget_exhausted = false; // stopped at the time budget, not at n
};

/// Successive transversal crossings of the primary section {y = 1, mu > 1}
/// (direction of increasing y) of the reduced flow started at s0, falling
/// back to the section {mu = F(lambda), y > lambda} when the primary section
/// is never reached. Throws NoCrossingError when the budget expires with no
/// crossings on either section.
PoincareResult poincare_crossings(const ModelParams& params,
                                  std::array<double, 2> s0, int n,
                                  const IntegratorConfig& cfg);

struct CanardSegment {
    double onset_tau = 0.0;     // within the measured cycle, cycle time base
    double duration_slow = 0.0; // delta0 * (fast-time duration)
    double max_distance = 0.0;  // max distance to the branch within the run
};

enum class CycleKind { relaxation, canard_cycle, none };

const char* to_string(CycleKind k);

struct CycleReport {
    bool converged = false;
    double period = 0.0;
    double y_min = 0.0, y_max = 0.0;
    double mu_min = 0.0, mu_max = 0.0;
    double section_value = 0.0; // fixed-point coordinate on the section
    std::optional<CanardSegment> canard;
    CycleKind kind = CycleKind::none;
};

struct CycleClassification {
    CycleKind kind = CycleKind::relaxation;
    std::optional<CanardSegment> canard;
};

/// Classifies one measured cycle: a canard segment is a maximal run of the
/// orbit staying within kappa*sqrt(delta0) of the repelling branch
/// {mu = F_plus(y), y in (y_f, 1)} for slow time (= delta0 * fast time)
/// at least d_min. kind = canard_cycle when a segment exists and the cycle
/// stays right of the fold (y_min > y_f); relaxation otherwise.
CycleClassification classify_cycle(const Trajectory& cycle,
                                   const ModelParams& params,
                                   double kappa = 3.0, double d_min = 0.1);

struct CycleSearch {
    double conv_tol = 1e-8;
    int max_crossings = 200;
    double kappa = 3.0;
    double d_min = 0.1;
    std::optional<std::array<double, 2>> initial_state;
};

/// Finds the attracting limit cycle of the reduced system, if any: discards
/// transient crossings until successive section coordinates differ by less
/// than conv_tol, then measures one full return. Not converged (kind = none)
/// when crossings never settle, cease, or collapse onto the equilibrium.
CycleReport find_limit_cycle(const ModelParams& params,
                             const IntegratorConfig& cfg,
                             double conv_tol = 1e-8);
CycleReport find_limit_cycle(const ModelParams& params,
                             const IntegratorConfig& cfg,
                             const CycleSearch& search,
                             std::array<double, 2>* final_state = nullptr);

struct LambdaPoint {
    double lambda = 0.0;
    EquilibriumReport eq;
    CycleReport cycle;
    std::string error; // empty on success
};

struct BifurcationDiagram {
    std::vector<double> lambda_grid;
    std::vector<LambdaPoint> points;
};

/// Per-lambda equilibrium and cycle reports over a strictly monotone grid
/// in (0, 2); continuation follows the grid order (a descending grid sweeps
/// from high lambda down) and the returned diagram is ascending either way.
/// Grid points are distributed over `jobs` contiguous chunks; within a chunk
/// the initial state is continued from the previous point. Per-point
/// failures are recorded in LambdaPoint::error and the sweep continues.
BifurcationDiagram sweep_lambda(double A, double delta0,
                                std::span<const double> lambda_grid,
                                const IntegratorConfig& cfg, int jobs = 1);

struct Episode {
    double t_start = 0.0, t_end = 0.0;
    double psi_min = 0.0, psi_max = 0.0;
};

struct ExcursionStats {
    int count_large = 0;
    std::vector<Episode> episodes; // disjoint, time-ordered
    std::vector<double> envelope_tau;
    std::vector<double> envelope_amp; // windowed max-min amplitude
    double threshold = 0.0;
    double min_gap = 0.0;
    double mean = 0.0;
};

/// Level-crossing episode detection: an episode is a maximal interval with
/// psi - mean(psi) > threshold; episodes closer than min_gap merge.
ExcursionStats count_large_excursions(std::span<const double> tau,
                                      std::span<const double> psi,
                                      double threshold, double min_gap);

/// Upper excursion envelope: per sample, the maximum of psi - mean(psi)
/// over a centered window (the discrete upper envelope of the spike train).
void amplitude_envelope(std::span<const double> tau,
                        std::span<const double> psi, double window,
                        std::vector<double>& env_tau,
                        std::vector<double>& env_amp);

struct ForcedRunResult {
    Trajectory traj;
    std::vector<double> psi; // 1 - y at the trajectory samples
    ExcursionStats stats;    // from a uniform resampling of psi
};

/// Integrates the forced reduced system over t_span and quantifies the psi
/// excursions. threshold defaults to half the half-range of the psi series;
/// min_gap is in units of tau. The envelope window is `envelope_window`.
ForcedRunResult forced_run(const ForcingSpec& f, double delta0,
                           std::pair<double, double> t_span,
                           const IntegratorConfig& cfg,
                           std::optional<double> threshold = std::nullopt,
                           double min_gap = 5.0,
                           std::optional<std::array<double, 2>> s0 = std::nullopt,
                           double envelope_window = 60.0);

} // namespace ocirc
