#pragma once

// Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)) with
// 4th-order dense output and switching-event localization. No accepted step
// straddles a splitting surface undetected: sign changes of every switching
// function are located on the dense output by bisection, the step is
// truncated at the crossing, the event is recorded, and integration restarts
// from the crossing point.

#include "ocirc/core.hpp"

namespace ocirc {

class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double event_tol = 1e-12; // absolute time tolerance of event bisection
    double max_step = std::numeric_limits<double>::infinity();
    long max_steps = 20'000'000;

    void validate() const;
};

Trajectory integrate(const PiecewiseVectorField& field,
                     std::span<const double> s0, double t0, double t1,
                     const IntegratorConfig& cfg = {});

/// Interpolated state at time t. Exact at sample times; never interpolates
/// across an event marker (each dense segment lies in one smooth region).
/// Throws std::out_of_range outside the trajectory's time range.
std::vector<double> dense_eval(const Trajectory& traj, double t);

/// Terminal state of a fixed-step Dormand-Prince run with n_steps steps and
/// no event handling. Test utility for convergence measurements.
std::vector<double> fixed_step_terminal(const PiecewiseVectorField& field,
                                        std::span<const double> s0, double t0,
                                        double t1, int n_steps);

/// Measured convergence order from a Richardson ratio of fixed-step runs at
/// h, h/2, h/4 (base step (t1-t0)/base_steps). Nominal order is 5.
double convergence_order(const PiecewiseVectorField& field,
                         std::span<const double> s0, double t0, double t1,
                         int base_steps = 50);

} // namespace ocirc
