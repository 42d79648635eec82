#pragma once

// Right-hand sides of the model hierarchy: the 4-box dimensional system, its
// exact 2-box reduction, the nondimensional fast/slow form, the
// three-timescale extension, the reduced planar system, and its orbitally
// forced variant. Field builders wrap these as PiecewiseVectorField values.

#include "ocirc/core.hpp"

#include <array>

namespace ocirc {

/// Box temperatures/salinities of the 4-box model.
struct BoxState {
    double T_e = 0.0, T_p = 0.0, S_e = 0.0, S_p = 0.0;
};

/// Atmospheric forcing per box for the 4-box model.
struct BoxForcing {
    double T_e_a = 0.0, T_p_a = 0.0, S_e_a = 0.0, S_p_a = 0.0;
};

struct Gradients {
    double T = 0.0, S = 0.0, X = 0.0, Y = 0.0;
};

/// Per-box targets from the gradient forcings, centered on the reference
/// values: T_e_a = T0 + T_a/2, T_p_a = T0 - T_a/2, and likewise for S.
BoxForcing canonical_forcing(const DimensionalParams& p);

/// Circulation strength psi = psi0 [alpha (T_e - T_p) - beta (S_e - S_p)].
double circulation_psi(const BoxState& s, const DimensionalParams& p);

std::array<double, 4> rhs_stom4(const BoxState& s, const BoxForcing& f,
                                const DimensionalParams& p);
std::array<double, 4> rhs_stom4(const BoxState& s, const DimensionalParams& p);

/// (T, S, X, Y) = (T_e - T_p, S_e - S_p, T_e + T_p, S_e + S_p).
Gradients reduce_4box(const BoxState& s);

/// Planar gradient system: dT = R_T (T_a - T) - 2|psi| T, similarly for S,
/// with psi = psi0 (alpha T - beta S).
std::array<double, 2> rhs_stom2(double T, double S, const DimensionalParams& p);

/// State scaling of the nondimensionalization: x = T / T_a,
/// y = beta S / (alpha T_a), tau = R_S t.
struct ScalingMap {
    double T_a = 1.0;
    double y_per_S = 1.0; // beta / (alpha T_a)
    double R_S = 1.0;

    double x_of_T(double T) const { return T / T_a; }
    double y_of_S(double S) const { return y_per_S * S; }
    double tau_of_t(double t) const { return R_S * t; }
};

/// Returns epsilon = R_S/R_T, A = 2 psi0 alpha T_a / R_S,
/// mu = beta S_a / (alpha T_a) and the state scaling map.
/// Throws DegenerateParamsError when T_a = 0 or R_S = 0.
ModelParams nondimensionalize(const DimensionalParams& p,
                              ScalingMap* map = nullptr);

/// Fast-time form: x' = 1 - x - eps A |x - y| x, y' = eps (mu - y - A |x - y| y).
std::array<double, 2> rhs_nondim(double x, double y, const ModelParams& params);

/// Three-timescale fast-time form; mu' = eps delta (1 + a x - b y).
std::array<double, 3> rhs_lin3(double x, double y, double mu,
                               const ModelParams& params);

/// Reduced slow system: y' = mu - y - A |1 - y| y, mu' = delta0 (lambda - y).
std::array<double, 2> rhs_reduced(double y, double mu,
                                  const ModelParams& params);

double forcing_A(const ForcingSpec& f, double tau);
double forcing_lambda(const ForcingSpec& f, double tau);

/// Reduced system with time-varying A(tau), lambda(tau).
/// Throws std::out_of_range when a table is attached and tau is outside it.
std::array<double, 2> rhs_forced(double y, double mu, double tau,
                                 const ModelParams& params,
                                 const ForcingSpec& f);

/// psi = alpha psi0 (x - y); the dimensionless overload uses alpha psi0 = 1.
double psi(double x, double y);
double psi(double x, double y, const DimensionalParams& p);

PiecewiseVectorField make_stom4_field(const BoxForcing& f,
                                      const DimensionalParams& p);
PiecewiseVectorField make_stom2_field(const DimensionalParams& p);
PiecewiseVectorField make_nondim_field(const ModelParams& params);
PiecewiseVectorField make_lin3_field(const ModelParams& params);
PiecewiseVectorField make_reduced_field(const ModelParams& params);
PiecewiseVectorField make_forced_field(const ModelParams& params,
                                       const ForcingSpec& f);

} // namespace ocirc
