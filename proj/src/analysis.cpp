#include "ocirc/analysis.hpp"

#include "ocirc/models.hpp"

#include <algorithm>
#include <cmath>

namespace ocirc {

double F_plus(double y, double A) { return y + A * (1.0 - y) * y; }
double F_minus(double y, double A) { return y - A * (1.0 - y) * y; }
double F_plus_prime(double y, double A) { return 1.0 + A - 2.0 * A * y; }
double F_minus_prime(double y, double A) { return 1.0 - A + 2.0 * A * y; }

double critical_manifold_mu(double y, double A) {
    return y < 1.0 ? F_plus(y, A) : F_minus(y, A);
}

FoldPoint fold_point(double A) {
    if (!(A > 1.0))
        throw NoFoldError("fold_point: manifold is monotone for A <= 1");
    const double yf = (1.0 + A) / (2.0 * A);
    return {yf, (1.0 + A) * (1.0 + A) / (4.0 * A)};
}

EquilibriumReport equilibrium(const ModelParams& params) {
    const double lam = params.lambda;
    EquilibriumReport rep;
    rep.y0 = lam;
    rep.mu0 = critical_manifold_mu(lam, params.A);
    rep.det = params.delta0;
    if (lam == 1.0) {
        rep.branch = Branch::corner;
        rep.cls = EqClass::nonsmooth_corner;
        rep.trace = std::numeric_limits<double>::quiet_NaN();
        rep.discriminant = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    const double fp = lam < 1.0 ? F_plus_prime(lam, params.A)
                                : F_minus_prime(lam, params.A);
    rep.branch = lam < 1.0 ? Branch::thermal : Branch::haline;
    rep.trace = -fp;
    rep.discriminant = rep.trace * rep.trace - 4.0 * params.delta0;
    if (rep.trace == 0.0)
        rep.cls = EqClass::degenerate_hopf;
    else if (rep.trace < 0.0)
        rep.cls = rep.discriminant >= 0.0 ? EqClass::stable_node
                                          : EqClass::stable_focus;
    else
        rep.cls = rep.discriminant >= 0.0 ? EqClass::unstable_node
                                          : EqClass::unstable_focus;
    return rep;
}

RegimeReport classify_regime(const ModelParams& params) {
    RegimeReport rep;
    if (!(params.A > 1.0)) {
        rep.regime = Regime::equilibration_small_A;
        rep.bifurcation_at_corner = CornerType::not_applicable;
        return rep;
    }
    rep.fold = fold_point(params.A);
    rep.bifurcation_at_corner =
        params.A < 1.0 + 2.0 * std::sqrt(params.delta0)
            ? CornerType::canard_focus
            : CornerType::super_explosion_node;
    if (params.lambda >= 1.0)
        rep.regime = Regime::stable_haline;
    else if (params.lambda <= rep.fold->y)
        rep.regime = Regime::stable_thermal;
    else
        rep.regime = Regime::oscillating;
    return rep;
}

std::vector<Root2D> equilibria_of_2d(double mu, double A) {
    if (!(A > 0.0) || !(mu > 0.0))
        throw std::invalid_argument("equilibria_of_2d: need A > 0 and mu > 0");
    std::vector<Root2D> roots;
    auto stability_of = [&](double y) {
        double slope;
        if (y < 1.0)
            slope = F_plus_prime(y, A);
        else if (y > 1.0)
            slope = F_minus_prime(y, A);
        else {
            // Corner root: stable only when both one-sided slopes agree.
            const double left = F_plus_prime(1.0, A); // 1 - A
            if (left > 0.0)
                return Stability::stable; // right slope 1 + A is positive
            return Stability::marginal;
        }
        if (slope > 0.0)
            return Stability::stable;
        if (slope < 0.0)
            return Stability::unstable;
        return Stability::marginal;
    };
    auto admit = [&](double y, bool lower_branch) {
        if (lower_branch ? (y < 1.0) : (y > 1.0))
            roots.push_back({y, stability_of(y)});
        else if (y == 1.0 && mu == 1.0) {
            for (const auto& r : roots)
                if (r.y == 1.0)
                    return;
            roots.push_back({1.0, stability_of(1.0)});
        }
    };

    // Lower branch: A y^2 - (1+A) y + mu = 0.
    {
        const double disc = (1.0 + A) * (1.0 + A) - 4.0 * A * mu;
        if (disc == 0.0) {
            const double y = (1.0 + A) / (2.0 * A);
            if (y < 1.0)
                roots.push_back({y, Stability::marginal});
        } else if (disc > 0.0) {
            const double sq = std::sqrt(disc);
            admit(((1.0 + A) - sq) / (2.0 * A), true);
            admit(((1.0 + A) + sq) / (2.0 * A), true);
        }
    }
    // Upper branch: A y^2 + (1-A) y - mu = 0; the discriminant is positive
    // for mu > 0 and the admissible root is the larger one.
    {
        const double disc = (1.0 - A) * (1.0 - A) + 4.0 * A * mu;
        const double sq = std::sqrt(disc);
        admit(((A - 1.0) + sq) / (2.0 * A), false);
    }
    std::sort(roots.begin(), roots.end(),
              [](const Root2D& a, const Root2D& b) { return a.y < b.y; });
    return roots;
}

std::pair<CornerBifType, Criticality>
classify_corner_bifurcation(double g_prime0, double h_prime0, double eps) {
    if (!(g_prime0 < 0.0))
        throw ShapeError("classify_corner_bifurcation: need g'(0) < 0");
    if (!(h_prime0 > 0.0))
        throw ShapeError("classify_corner_bifurcation: need h'(0) > 0");
    if (!(eps > 0.0))
        throw ShapeError("classify_corner_bifurcation: need eps > 0");
    const double focus_bound = 2.0 * std::sqrt(eps);
    const double ag = std::abs(g_prime0);
    const double ah = std::abs(h_prime0);
    if (ah < focus_bound) {
        // Unstable focus after bifurcation: canard cycles. Subcritical only
        // in the focus-focus case with |g'| < |h'|.
        const bool sub = ag < focus_bound && ag < ah;
        return {CornerBifType::canard_cycles,
                sub ? Criticality::subcritical : Criticality::supercritical};
    }
    // Unstable node after bifurcation: super-explosion. A pre-bifurcation
    // focus carries enough rotation to make it subcritical.
    const bool sub = ag < focus_bound;
    return {CornerBifType::super_explosion,
            sub ? Criticality::subcritical : Criticality::supercritical};
}

double jacobian_fd_check(const ModelParams& params, std::array<double, 2> point,
                         double h) {
    const double y = point[0], mu = point[1];
    if (!(h > 0.0))
        throw std::invalid_argument("jacobian_fd_check: h must be positive");
    if (!(std::abs(y - 1.0) > h))
        throw std::invalid_argument(
            "jacobian_fd_check: point too close to the splitting line");
    const double fp = y < 1.0 ? F_plus_prime(y, params.A)
                              : F_minus_prime(y, params.A);
    // Analytic Jacobian of rhs_reduced at (y, mu).
    const double J[2][2] = {{-fp, 1.0}, {-params.delta0, 0.0}};

    double dev = 0.0;
    auto f = [&](double yy, double mm) { return rhs_reduced(yy, mm, params); };
    const auto fyp = f(y + h, mu), fym = f(y - h, mu);
    const auto fmp = f(y, mu + h), fmm = f(y, mu - h);
    for (int i = 0; i < 2; ++i) {
        const double dfy = (fyp[i] - fym[i]) / (2.0 * h);
        const double dfm = (fmp[i] - fmm[i]) / (2.0 * h);
        dev = std::max(dev, std::abs(dfy - J[i][0]));
        dev = std::max(dev, std::abs(dfm - J[i][1]));
    }
    return dev;
}

const char* to_string(EqClass c) {
    switch (c) {
    case EqClass::stable_node: return "stable-node";
    case EqClass::stable_focus: return "stable-focus";
    case EqClass::unstable_focus: return "unstable-focus";
    case EqClass::unstable_node: return "unstable-node";
    case EqClass::nonsmooth_corner: return "nonsmooth-corner";
    case EqClass::degenerate_hopf: return "degenerate-hopf";
    }
    return "?";
}

const char* to_string(Branch b) {
    switch (b) {
    case Branch::thermal: return "thermal";
    case Branch::corner: return "corner";
    case Branch::haline: return "haline";
    }
    return "?";
}

const char* to_string(Regime r) {
    switch (r) {
    case Regime::equilibration_small_A: return "equilibration-A<1";
    case Regime::stable_thermal: return "stable-thermal";
    case Regime::stable_haline: return "stable-haline";
    case Regime::oscillating: return "oscillating";
    }
    return "?";
}

const char* to_string(CornerType c) {
    switch (c) {
    case CornerType::canard_focus: return "canard-focus";
    case CornerType::super_explosion_node: return "super-explosion-node";
    case CornerType::not_applicable: return "not-applicable";
    }
    return "?";
}

const char* to_string(Stability s) {
    switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::marginal: return "marginal";
    }
    return "?";
}

const char* to_string(CornerBifType t) {
    switch (t) {
    case CornerBifType::canard_cycles: return "canard-cycles";
    case CornerBifType::super_explosion: return "super-explosion";
    }
    return "?";
}

const char* to_string(Criticality c) {
    switch (c) {
    case Criticality::subcritical: return "subcritical";
    case Criticality::supercritical: return "supercritical";
    }
    return "?";
}

} // namespace ocirc
