#include "ocirc/models.hpp"

#include <algorithm>
#include <cmath>

namespace ocirc {

BoxForcing canonical_forcing(const DimensionalParams& p) {
    return {p.T0 + 0.5 * p.T_a, p.T0 - 0.5 * p.T_a,
            p.S0 + 0.5 * p.S_a, p.S0 - 0.5 * p.S_a};
}

double circulation_psi(const BoxState& s, const DimensionalParams& p) {
    return p.psi0 * (p.alpha * (s.T_e - s.T_p) - p.beta * (s.S_e - s.S_p));
}

std::array<double, 4> rhs_stom4(const BoxState& s, const BoxForcing& f,
                                const DimensionalParams& p) {
    const double aps = std::abs(circulation_psi(s, p));
    return {p.R_T * (f.T_e_a - s.T_e) + aps * (s.T_p - s.T_e),
            p.R_T * (f.T_p_a - s.T_p) + aps * (s.T_e - s.T_p),
            p.R_S * (f.S_e_a - s.S_e) + aps * (s.S_p - s.S_e),
            p.R_S * (f.S_p_a - s.S_p) + aps * (s.S_e - s.S_p)};
}

std::array<double, 4> rhs_stom4(const BoxState& s, const DimensionalParams& p) {
    return rhs_stom4(s, canonical_forcing(p), p);
}

Gradients reduce_4box(const BoxState& s) {
    return {s.T_e - s.T_p, s.S_e - s.S_p, s.T_e + s.T_p, s.S_e + s.S_p};
}

std::array<double, 2> rhs_stom2(double T, double S,
                                const DimensionalParams& p) {
    const double aps = std::abs(p.psi0 * (p.alpha * T - p.beta * S));
    return {p.R_T * (p.T_a - T) - 2.0 * aps * T,
            p.R_S * (p.S_a - S) - 2.0 * aps * S};
}

ModelParams nondimensionalize(const DimensionalParams& p, ScalingMap* map) {
    if (p.T_a == 0.0 || p.R_S == 0.0)
        throw DegenerateParamsError(
            "nondimensionalize: T_a and R_S must be nonzero");
    ModelParams out;
    out.epsilon = p.R_S / p.R_T;
    out.A = 2.0 * p.psi0 * p.alpha * p.T_a / p.R_S;
    out.mu = p.beta * p.S_a / (p.alpha * p.T_a);
    if (map)
        *map = {p.T_a, p.beta / (p.alpha * p.T_a), p.R_S};
    return out;
}

std::array<double, 2> rhs_nondim(double x, double y, const ModelParams& pr) {
    const double adv = pr.A * std::abs(x - y);
    return {1.0 - x - pr.epsilon * adv * x,
            pr.epsilon * (pr.mu - y - adv * y)};
}

std::array<double, 3> rhs_lin3(double x, double y, double mu,
                               const ModelParams& pr) {
    const double adv = pr.A * std::abs(x - y);
    return {1.0 - x - pr.epsilon * adv * x,
            pr.epsilon * (mu - y - adv * y),
            pr.epsilon * pr.delta * (1.0 + pr.a * x - pr.b * y)};
}

std::array<double, 2> rhs_reduced(double y, double mu, const ModelParams& pr) {
    return {mu - y - pr.A * std::abs(1.0 - y) * y,
            pr.delta0 * (pr.lambda - y)};
}

double forcing_A(const ForcingSpec& f, double tau) {
    if (f.has_table()) {
        const auto& t = f.table_tau;
        if (tau < t.front() || tau > t.back())
            throw std::out_of_range(
                "forcing_A: tau outside the tabulated range");
        auto it = std::upper_bound(t.begin(), t.end(), tau);
        if (it == t.end())
            return f.table_A.back();
        const std::size_t hi = static_cast<std::size_t>(it - t.begin());
        if (hi == 0)
            return f.table_A.front();
        const double w = (tau - t[hi - 1]) / (t[hi] - t[hi - 1]);
        return f.table_A[hi - 1] + w * (f.table_A[hi] - f.table_A[hi - 1]);
    }
    return f.A_bar + f.p * std::sin(f.omega * tau);
}

double forcing_lambda(const ForcingSpec& f, double tau) {
    return f.lambda_bar + f.q * std::sin(f.omega * (tau - f.theta));
}

std::array<double, 2> rhs_forced(double y, double mu, double tau,
                                 const ModelParams& pr, const ForcingSpec& f) {
    const double A = forcing_A(f, tau);
    const double lam = forcing_lambda(f, tau);
    return {mu - y - A * std::abs(1.0 - y) * y, pr.delta0 * (lam - y)};
}

double psi(double x, double y) { return x - y; }

double psi(double x, double y, const DimensionalParams& p) {
    return p.alpha * p.psi0 * (x - y);
}

namespace {

// |1 - y| y split by the y = 1 splitting line.
double adv_below(double y, double A) { return A * (1.0 - y) * y; }
double adv_above(double y, double A) { return A * (y - 1.0) * y; }

} // namespace

PiecewiseVectorField make_stom4_field(const BoxForcing& f,
                                      const DimensionalParams& p) {
    auto sw = [p](std::span<const double> s) {
        return p.alpha * (s[0] - s[1]) - p.beta * (s[2] - s[3]);
    };
    auto rhs_side = [f, p](double sign) {
        return [f, p, sign](double, std::span<const double> s,
                            std::span<double> ds) {
            const double aps =
                sign * p.psi0 *
                (p.alpha * (s[0] - s[1]) - p.beta * (s[2] - s[3]));
            ds[0] = p.R_T * (f.T_e_a - s[0]) + aps * (s[1] - s[0]);
            ds[1] = p.R_T * (f.T_p_a - s[1]) + aps * (s[0] - s[1]);
            ds[2] = p.R_S * (f.S_e_a - s[2]) + aps * (s[3] - s[2]);
            ds[3] = p.R_S * (f.S_p_a - s[3]) + aps * (s[2] - s[3]);
        };
    };
    std::vector<Region> regions{{1u, "psi >= 0", rhs_side(+1.0)},
                                {0u, "psi < 0", rhs_side(-1.0)}};
    return PiecewiseVectorField(4, {sw}, std::move(regions));
}

PiecewiseVectorField make_stom2_field(const DimensionalParams& p) {
    auto sw = [p](std::span<const double> s) {
        return p.alpha * s[0] - p.beta * s[1];
    };
    auto rhs_side = [p](double sign) {
        return [p, sign](double, std::span<const double> s,
                         std::span<double> ds) {
            const double aps =
                sign * p.psi0 * (p.alpha * s[0] - p.beta * s[1]);
            ds[0] = p.R_T * (p.T_a - s[0]) - 2.0 * aps * s[0];
            ds[1] = p.R_S * (p.S_a - s[1]) - 2.0 * aps * s[1];
        };
    };
    std::vector<Region> regions{{1u, "psi >= 0", rhs_side(+1.0)},
                                {0u, "psi < 0", rhs_side(-1.0)}};
    return PiecewiseVectorField(2, {sw}, std::move(regions));
}

PiecewiseVectorField make_nondim_field(const ModelParams& pr) {
    auto sw = [](std::span<const double> s) { return s[0] - s[1]; };
    auto rhs_side = [pr](double sign) {
        return [pr, sign](double, std::span<const double> s,
                          std::span<double> ds) {
            const double adv = pr.A * sign * (s[0] - s[1]);
            ds[0] = 1.0 - s[0] - pr.epsilon * adv * s[0];
            ds[1] = pr.epsilon * (pr.mu - s[1] - adv * s[1]);
        };
    };
    std::vector<Region> regions{{1u, "x >= y", rhs_side(+1.0)},
                                {0u, "x < y", rhs_side(-1.0)}};
    return PiecewiseVectorField(2, {sw}, std::move(regions));
}

PiecewiseVectorField make_lin3_field(const ModelParams& pr) {
    auto sw = [](std::span<const double> s) { return s[0] - s[1]; };
    auto rhs_side = [pr](double sign) {
        return [pr, sign](double, std::span<const double> s,
                          std::span<double> ds) {
            const double adv = pr.A * sign * (s[0] - s[1]);
            ds[0] = 1.0 - s[0] - pr.epsilon * adv * s[0];
            ds[1] = pr.epsilon * (s[2] - s[1] - adv * s[1]);
            ds[2] = pr.epsilon * pr.delta * (1.0 + pr.a * s[0] - pr.b * s[1]);
        };
    };
    std::vector<Region> regions{{1u, "x >= y", rhs_side(+1.0)},
                                {0u, "x < y", rhs_side(-1.0)}};
    return PiecewiseVectorField(3, {sw}, std::move(regions));
}

PiecewiseVectorField make_reduced_field(const ModelParams& pr) {
    auto sw = [](std::span<const double> s) { return s[0] - 1.0; };
    auto below = [pr](double, std::span<const double> s, std::span<double> ds) {
        ds[0] = s[1] - s[0] - adv_below(s[0], pr.A);
        ds[1] = pr.delta0 * (pr.lambda - s[0]);
    };
    auto above = [pr](double, std::span<const double> s, std::span<double> ds) {
        ds[0] = s[1] - s[0] - adv_above(s[0], pr.A);
        ds[1] = pr.delta0 * (pr.lambda - s[0]);
    };
    std::vector<Region> regions{{0u, "y < 1", below}, {1u, "y >= 1", above}};
    return PiecewiseVectorField(2, {sw}, std::move(regions));
}

PiecewiseVectorField make_forced_field(const ModelParams& pr,
                                       const ForcingSpec& f) {
    f.validate();
    auto sw = [](std::span<const double> s) { return s[0] - 1.0; };
    auto rhs_side = [pr, f](bool upper) {
        return [pr, f, upper](double tau, std::span<const double> s,
                              std::span<double> ds) {
            const double A = forcing_A(f, tau);
            ds[0] = s[1] - s[0] -
                    (upper ? adv_above(s[0], A) : adv_below(s[0], A));
            ds[1] = pr.delta0 * (forcing_lambda(f, tau) - s[0]);
        };
    };
    std::vector<Region> regions{{0u, "y < 1", rhs_side(false)},
                                {1u, "y >= 1", rhs_side(true)}};
    return PiecewiseVectorField(2, {sw}, std::move(regions),
                                /*time_dependent=*/true);
}

} // namespace ocirc
