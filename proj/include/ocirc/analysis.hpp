#pragma once

// Closed-form geometry of the reduced system: critical manifold and fold,
// equilibrium location and linearization, regime classification, the 2D
// equilibria solver, and the general corner-bifurcation classifier.

#include "ocirc/core.hpp"

#include <array>
#include <optional>
#include <utility>

namespace ocirc {

class NoFoldError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Branches of the critical manifold mu = F(y) = y + A |1 - y| y.
double F_plus(double y, double A);        // y < 1 branch
double F_minus(double y, double A);       // y > 1 branch
double F_plus_prime(double y, double A);  // 1 + A - 2 A y
double F_minus_prime(double y, double A); // 1 - A + 2 A y

/// F(y) with F_plus for y < 1 and F_minus for y >= 1 (they agree at y = 1).
double critical_manifold_mu(double y, double A);

struct FoldPoint {
    double y = 0.0;
    double mu = 0.0;
};

/// Local maximum of F for A > 1: (y_f, mu_f) = ((1+A)/(2A), (1+A)^2/(4A)).
/// Throws NoFoldError for A <= 1 (monotone manifold).
FoldPoint fold_point(double A);

enum class EqClass {
    stable_node,
    stable_focus,
    unstable_focus,
    unstable_node,
    nonsmooth_corner, // lambda = 1
    degenerate_hopf   // trace exactly zero (lambda at the fold)
};

enum class Branch { thermal, corner, haline };

struct EquilibriumReport {
    double y0 = 0.0;
    double mu0 = 0.0;
    double trace = 0.0;
    double det = 0.0;
    double discriminant = 0.0;
    EqClass cls = EqClass::stable_node;
    Branch branch = Branch::thermal;
};

/// The unique equilibrium (lambda, F(lambda)) of the reduced system with its
/// Jacobian data: trace = -F'(lambda), det = delta0,
/// discriminant = trace^2 - 4 delta0. lambda = 1 reports nonsmooth_corner
/// (trace/discriminant are NaN there: the field is not differentiable).
EquilibriumReport equilibrium(const ModelParams& params);

enum class Regime {
    equilibration_small_A, // A <= 1: globally attracting equilibrium
    stable_thermal,
    stable_haline,
    oscillating
};

enum class CornerType { canard_focus, super_explosion_node, not_applicable };

struct RegimeReport {
    Regime regime = Regime::equilibration_small_A;
    CornerType bifurcation_at_corner = CornerType::not_applicable;
    std::optional<FoldPoint> fold;
};

/// Regime by the lambda thresholds (fold position and the corner lambda = 1)
/// and the corner-bifurcation type by A against 1 + 2 sqrt(delta0); the
/// boundary A = 1 + 2 sqrt(delta0) is assigned to the node branch. The
/// boundary lambda values are assigned to the adjacent stable regimes
/// (lambda = 1 is globally attracting in the haline state).
RegimeReport classify_regime(const ModelParams& params);

enum class Stability { stable, unstable, marginal };

struct Root2D {
    double y = 0.0;
    Stability stability = Stability::stable;
};

/// Equilibria of the planar nondimensional system on the critical manifold:
/// roots of mu = F(y) with their region constraints (y = 1 admitted when
/// mu = 1), stability by the sign of dmu/dy. Sorted by y; a tangency double
/// root appears once, marked marginal.
std::vector<Root2D> equilibria_of_2d(double mu, double A);

enum class CornerBifType { canard_cycles, super_explosion };
enum class Criticality { subcritical, supercritical };

/// General corner-bifurcation classifier for a piecewise manifold with
/// left slope g'(0) < 0 and right slope h'(0) > 0 at the corner, fast/slow
/// ratio eps. Canard cycles require h'(0) < 2 sqrt(eps); otherwise the
/// bifurcation is a super-explosion. Criticality follows the focus/node
/// character of the pre-bifurcation equilibrium.
/// Throws ShapeError on violated slope signs.
std::pair<CornerBifType, Criticality>
classify_corner_bifurcation(double g_prime0, double h_prime0, double eps);

/// Max deviation between the analytic reduced-system Jacobian and central
/// finite differences at an off-corner point (|y - 1| > h required).
double jacobian_fd_check(const ModelParams& params, std::array<double, 2> point,
                         double h);

const char* to_string(EqClass c);
const char* to_string(Branch b);
const char* to_string(Regime r);
const char* to_string(CornerType c);
const char* to_string(Stability s);
const char* to_string(CornerBifType t);
const char* to_string(Criticality c);

} // namespace ocirc
