#pragma once

// Core domain types: parameter records, the piecewise-smooth vector field
// abstraction, trajectories with switching events, and forcing specs.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ocirc {

class DimensionMismatchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DegenerateParamsError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dimensionless parameters of the fast/slow circulation models.
///
/// A is the advective strength, epsilon = R_S/R_T the fast/slow ratio,
/// delta0 = delta*b the slowest-scale parameter, lambda = (1+a)/b the
/// slow-nullcline position, mu the (constant) forcing ratio, and a, b the
/// feedback coefficients of the three-timescale model. `delta` is kept
/// explicitly because delta0 = delta*b cannot be inverted when b = 0.
struct ModelParams {
    double A = 5.0;
    double epsilon = 0.01;
    double delta0 = 0.1;
    double lambda = 0.8;
    double mu = 1.0;
    double a = 3.0;
    double b = 5.0;
    double delta = 0.02;

    // Throws DegenerateParamsError on violated sign/range constraints.
    void validate() const;

    // Keeps delta consistent with delta0 and b (requires b > 0).
    void sync_delta_from_delta0();
    // Derives a from lambda and b via lambda = (1+a)/b.
    void sync_a_from_lambda();
};

/// Physical parameters of the dimensional box models.
struct DimensionalParams {
    double R_T = 1.0;    // thermal relaxation rate (1/time)
    double R_S = 0.1;    // haline relaxation rate (1/time), R_S < R_T
    double alpha = 0.2;  // thermal expansion coefficient
    double beta = 0.8;   // haline contraction coefficient
    double psi0 = 0.3;   // circulation scale
    double T_a = 2.5;    // atmospheric temperature gradient forcing
    double S_a = 0.6875; // atmospheric salinity gradient forcing
    double T0 = 0.0;
    double S0 = 0.0;
    double rho0 = 1.0;

    void validate() const;
};

/// Sinusoidal (or tabulated) orbital forcing for the reduced model:
///   A(tau)      = A_bar + p sin(omega tau)            (or table lookup)
///   lambda(tau) = lambda_bar + q sin(omega (tau - theta))
struct ForcingSpec {
    double A_bar = 3.5;
    double p = 2.4;
    double lambda_bar = 0.8;
    double q = 1.99;
    double omega = 3.14159265358979323846 / 270.0;
    double theta = 250.0;
    // Optional (tau, A) table overriding the sinusoid for A; strictly
    // increasing in tau.
    std::vector<double> table_tau;
    std::vector<double> table_A;

    bool has_table() const { return !table_tau.empty(); }
    void validate() const;
};

struct SwitchEvent {
    double time = 0.0;
    int index = 0;     // which switching function crossed zero
    int direction = 0; // +1 crossing into g >= 0, -1 into g < 0
};

/// Time-ordered state samples with switching-event markers and the dense
/// interpolation data produced by the integrator.
struct Trajectory {
    int dim = 0;
    std::vector<double> times;  // strictly increasing
    std::vector<double> states; // times.size() * dim, row-major
    std::vector<SwitchEvent> events;

    // One dense segment per sample interval: interpolation polynomial of
    // the accepted step that produced it. seg_h is the full step length
    // the polynomial was built on (>= the sample interval when a step was
    // truncated at an event).
    std::vector<double> seg_t0;
    std::vector<double> seg_h;
    std::vector<double> seg_cont; // 5 * dim coefficients per segment

    std::span<const double> state(std::size_t i) const {
        return {states.data() + i * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim)};
    }
    std::span<const double> front() const { return state(0); }
    std::span<const double> back() const { return state(times.size() - 1); }
    std::size_t size() const { return times.size(); }

    // Checks the structural invariants (monotone times, aligned arrays,
    // event times present among sample times). Throws std::logic_error.
    void check_invariants() const;
};

using Rhs = std::function<void(double t, std::span<const double> s,
                               std::span<double> ds)>;
using SwitchFn = std::function<double(std::span<const double> s)>;

struct Region {
    std::uint32_t pattern = 0; // bit i set iff switching function i >= 0
    std::string label;
    Rhs rhs;
};

/// A vector field assembled from smooth right-hand sides on the regions cut
/// out by the zero sets of the switching functions. The fields used here are
/// continuous across every splitting surface, so the tie-break convention
/// (a zero switching value counts as the ">=" side) does not affect the
/// dynamics, only which region identifier is reported.
class PiecewiseVectorField {
public:
    PiecewiseVectorField(int dim, std::vector<SwitchFn> switches,
                         std::vector<Region> regions,
                         bool time_dependent = false);

    int dim() const { return dim_; }
    std::size_t num_switches() const { return switches_.size(); }
    bool time_dependent() const { return time_dependent_; }

    double switch_value(std::size_t i, std::span<const double> s) const;

    /// Sign pattern of the switching functions at s, zero tie-broken to the
    /// nonnegative side. Total and deterministic.
    std::uint32_t region_pattern(std::span<const double> s) const;

    const Region& region_of(std::span<const double> s) const;
    std::span<const Region> regions() const { return regions_; }

    /// Evaluates the active region's right-hand side into ds.
    void evaluate(double t, std::span<const double> s,
                  std::span<double> ds) const;
    std::vector<double> evaluate(double t, std::span<const double> s) const;

private:
    void check_dim(std::span<const double> s) const;

    int dim_;
    std::vector<SwitchFn> switches_;
    std::vector<Region> regions_;
    bool time_dependent_;
};

} // namespace ocirc
