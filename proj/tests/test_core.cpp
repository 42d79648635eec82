#include <doctest.h>

#include "ocirc/core.hpp"
#include "ocirc/models.hpp"

#include <cmath>
#include <random>

using namespace ocirc;

namespace {

ModelParams reduced_params(double A, double lambda, double delta0) {
    ModelParams p;
    p.A = A;
    p.lambda = lambda;
    p.delta0 = delta0;
    return p;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Max-norm disagreement between all region right-hand sides at a point on a
// splitting surface.
double surface_disagreement(const PiecewiseVectorField& field, double t,
                            std::span<const double> s) {
    const auto regions = field.regions();
    std::vector<double> ref(s.size()), other(s.size());
    regions.front().rhs(t, s, ref);
    double worst = 0.0;
    for (std::size_t r = 1; r < regions.size(); ++r) {
        regions[r].rhs(t, s, other);
        worst = std::max(worst, max_abs_diff(ref, other));
    }
    return worst;
}

} // namespace

TEST_CASE("evaluate dispatches the reduced model") {
    const ModelParams p = reduced_params(5.0, 0.8, 0.1);
    const PiecewiseVectorField field = make_reduced_field(p);

    // Corner point: |1 - y| y vanishes.
    const double corner[2] = {1.0, 1.0};
    auto ds = field.evaluate(0.0, corner);
    CHECK(ds[0] == 0.0);
    CHECK(ds[1] == doctest::Approx(0.1 * (0.8 - 1.0)));

    // mu - y - A (1 - y) y = 1.6 - 0.8 - 5 * 0.2 * 0.8 = 0.
    const double on_manifold[2] = {0.8, 1.6};
    ds = field.evaluate(0.0, on_manifold);
    CHECK(std::abs(ds[0]) < 1e-15);
    CHECK(ds[1] == 0.0);

    const double wrong[3] = {0.8, 1.6, 0.0};
    CHECK_THROWS_AS((void)field.evaluate(0.0, wrong), DimensionMismatchError);
}

TEST_CASE("region_of tie-breaks the splitting line to the >= side") {
    const PiecewiseVectorField field =
        make_reduced_field(reduced_params(5.0, 0.8, 0.1));
    const double below[2] = {0.9, 1.0};
    const double on[2] = {1.0, 1.0};
    const double above[2] = {1.1, 1.0};
    CHECK(field.region_of(below).label == "y < 1");
    CHECK(field.region_of(on).label == "y >= 1");
    CHECK(field.region_of(above).label == "y >= 1");

    // Total and deterministic.
    for (int i = 0; i < 100; ++i)
        CHECK(field.region_pattern(on) == field.region_pattern(on));
}

TEST_CASE("right-hand sides agree on every splitting surface") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u01(0.0, 2.0);
    std::uniform_real_distribution<double> upm(-2.0, 2.0);

    const ModelParams mp = reduced_params(5.0, 0.8, 0.1);
    DimensionalParams dp;

    SUBCASE("reduced and forced at y = 1") {
        const PiecewiseVectorField reduced = make_reduced_field(mp);
        ForcingSpec f;
        const PiecewiseVectorField forced = make_forced_field(mp, f);
        for (int i = 0; i < 1000; ++i) {
            const double s[2] = {1.0, u01(rng)};
            CHECK(surface_disagreement(reduced, 0.0, s) < 1e-12);
            CHECK(surface_disagreement(forced, u01(rng) * 100.0, s) < 1e-12);
        }
    }
    SUBCASE("nondim and lin3 at x = y") {
        const PiecewiseVectorField nd = make_nondim_field(mp);
        const PiecewiseVectorField l3 = make_lin3_field(mp);
        for (int i = 0; i < 1000; ++i) {
            const double v = u01(rng);
            const double s2[2] = {v, v};
            const double s3[3] = {v, v, u01(rng)};
            CHECK(surface_disagreement(nd, 0.0, s2) < 1e-12);
            CHECK(surface_disagreement(l3, 0.0, s3) < 1e-12);
        }
    }
    SUBCASE("gradient models at psi = 0") {
        const PiecewiseVectorField s2f = make_stom2_field(dp);
        const PiecewiseVectorField s4f =
            make_stom4_field(canonical_forcing(dp), dp);
        for (int i = 0; i < 1000; ++i) {
            const double T = upm(rng);
            const double s2[2] = {T, dp.alpha * T / dp.beta};
            CHECK(surface_disagreement(s2f, 0.0, s2) < 1e-12);

            const double Te = upm(rng), Tp = upm(rng), Se = upm(rng);
            const double Sp = Se - dp.alpha * (Te - Tp) / dp.beta;
            const double s4[4] = {Te, Tp, Se, Sp};
            CHECK(surface_disagreement(s4f, 0.0, s4) < 1e-12);
        }
    }
}

TEST_CASE("parameter validation") {
    ModelParams p = reduced_params(5.0, 0.8, 0.1);
    CHECK_NOTHROW(p.validate());
    p.A = 0.0;
    CHECK_THROWS_AS(p.validate(), DegenerateParamsError);
    p = reduced_params(5.0, 0.8, 0.1);
    p.epsilon = 1.0;
    CHECK_THROWS_AS(p.validate(), DegenerateParamsError);

    DimensionalParams d;
    CHECK_NOTHROW(d.validate());
    d.R_S = d.R_T;
    CHECK_THROWS_AS(d.validate(), DegenerateParamsError);

    ForcingSpec f;
    CHECK_NOTHROW(f.validate());
    f.table_tau = {0.0, 1.0, 1.0};
    f.table_A = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(f.validate(), DegenerateParamsError);
    f.omega = 0.0;
    f.table_tau.clear();
    f.table_A.clear();
    CHECK_THROWS_AS(f.validate(), DegenerateParamsError);
}

TEST_CASE("trajectory invariants") {
    Trajectory tr;
    tr.dim = 1;
    tr.times = {0.0, 1.0, 2.0};
    tr.states = {0.0, 1.0, 2.0};
    CHECK_NOTHROW(tr.check_invariants());

    tr.events.push_back({1.0, 0, 1});
    CHECK_NOTHROW(tr.check_invariants());
    tr.events.push_back({1.5, 0, 1}); // not a sample time
    CHECK_THROWS_AS(tr.check_invariants(), std::logic_error);
    tr.events.pop_back();

    tr.times = {0.0, 1.0, 1.0};
    CHECK_THROWS_AS(tr.check_invariants(), std::logic_error);
}
