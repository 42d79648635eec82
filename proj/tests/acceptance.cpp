// Acceptance suite: one numbered check per release criterion, each printed
// as a single PASS/FAIL line. Returns the number of failed criteria.
//
// Criterion 11 invokes the CLI binary named by the OCIRC_BIN environment
// variable.

#include "ocirc/analysis.hpp"
#include "ocirc/core.hpp"
#include "ocirc/cycles.hpp"
#include "ocirc/integrate.hpp"
#include "ocirc/io.hpp"
#include "ocirc/models.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ocirc;

namespace {

struct Harness {
    int failures = 0;

    void check(int number, const std::string& name, bool ok,
               const std::string& detail) {
        std::printf("[%s] criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL",
                    number, name.c_str(), detail.c_str());
        std::fflush(stdout);
        if (!ok)
            ++failures;
    }

    void run(int number, const std::string& name,
             const std::function<std::pair<bool, std::string>()>& body) {
        try {
            const auto [ok, detail] = body();
            check(number, name, ok, detail);
        } catch (const std::exception& e) {
            check(number, name, false, std::string("exception: ") + e.what());
        }
    }
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

ModelParams params_of(double A, double lambda, double delta0) {
    ModelParams p;
    p.A = A;
    p.lambda = lambda;
    p.delta0 = delta0;
    return p;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sa += a[i];
        sb += b[i];
        saa += a[i] * a[i];
        sbb += b[i] * b[i];
        sab += a[i] * b[i];
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double va = saa / n - (sa / n) * (sa / n);
    const double vb = sbb / n - (sb / n) * (sb / n);
    return cov / std::sqrt(va * vb);
}

// ---- criterion bodies ------------------------------------------------

std::pair<bool, std::string> c1_reduction_identity() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> ub(-2.0, 2.0);
    std::uniform_real_distribution<double> up(0.1, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        DimensionalParams p;
        p.R_T = up(rng) + 1.0;
        p.R_S = up(rng) * 0.4;
        p.alpha = up(rng);
        p.beta = up(rng);
        p.psi0 = up(rng);
        p.T_a = up(rng);
        p.S_a = up(rng);
        const BoxState s{ub(rng), ub(rng), ub(rng), ub(rng)};
        const BoxForcing f = canonical_forcing(p);
        const auto d4 = rhs_stom4(s, f, p);
        const auto d2 = rhs_stom2(s.T_e - s.T_p, s.S_e - s.S_p, p);
        worst = std::max(worst, std::abs((d4[0] - d4[1]) - d2[0]));
        worst = std::max(worst, std::abs((d4[2] - d4[3]) - d2[1]));
    }
    return {worst < 1e-12, fmt("max deviation %.3g over 1000 samples", worst)};
}

std::pair<bool, std::string> c2_jacobian() {
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> uy(0.0, 2.0);
    std::uniform_real_distribution<double> um(0.0, 2.5);
    std::uniform_real_distribution<double> uA(0.3, 6.0);
    std::uniform_real_distribution<double> ud(0.005, 0.3);
    double worst = 0.0;
    int done = 0;
    bool det_exact = true;
    while (done < 100) {
        const double y = uy(rng);
        if (std::abs(y - 1.0) < 1e-3)
            continue;
        ++done;
        const ModelParams p = params_of(uA(rng), 0.8, ud(rng));
        worst = std::max(worst, jacobian_fd_check(p, {y, um(rng)}, 1e-5));
        const EquilibriumReport rep =
            equilibrium(params_of(p.A, std::min(uy(rng), 1.9) + 1e-3, p.delta0));
        det_exact = det_exact && (rep.det == p.delta0);
    }
    return {worst < 1e-6 && det_exact,
            fmt("max FD deviation %.3g, det exact: %s", worst,
                det_exact ? "yes" : "no")};
}

std::pair<bool, std::string> c3_regime_grid() {
    const IntegratorConfig cfg;
    const double As[] = {0.5, 1.1, 1.5, 2.0, 3.5, 5.0};
    const double d0s[] = {0.01, 0.1};
    int points = 0, agree = 0;
    std::string first_bad;
    for (double A : As) {
        if (std::abs(A - 1.0) <= 0.02)
            continue;
        for (double d0 : d0s) {
            if (std::abs(A - (1.0 + 2.0 * std::sqrt(d0))) <= 0.02)
                continue;
            for (int k = 0; k <= 18; ++k) {
                const double lambda = 0.40 + 0.05 * k;
                if (std::abs(lambda - 1.0) <= 0.02)
                    continue;
                if (A > 1.0 &&
                    std::abs(lambda - (1.0 + A) / (2.0 * A)) <= 0.02)
                    continue;
                ++points;
                const ModelParams p = params_of(A, lambda, d0);
                const bool cycle_predicted =
                    classify_regime(p).regime == Regime::oscillating;
                const CycleReport rep = find_limit_cycle(p, cfg);
                if (rep.converged == cycle_predicted)
                    ++agree;
                else if (first_bad.empty())
                    first_bad = fmt(" first mismatch A=%g lambda=%g d0=%g "
                                    "(predicted %s, found %s)",
                                    A, lambda, d0,
                                    cycle_predicted ? "cycle" : "equilibrium",
                                    rep.converged ? "cycle" : "equilibrium");
            }
        }
    }
    return {agree == points,
            fmt("%d/%d grid points agree%s", agree, points, first_bad.c_str())};
}

std::pair<bool, std::string> c4_relaxation_reference() {
    const ModelParams p = params_of(5.0, 0.8, 0.1);
    IntegratorConfig cfg;
    const CycleReport a = find_limit_cycle(p, cfg);
    IntegratorConfig fine = cfg;
    fine.rel_tol /= 2.0;
    fine.abs_tol /= 2.0;
    const CycleReport b = find_limit_cycle(p, fine);
    if (!a.converged || !b.converged)
        return {false, "cycle did not converge"};
    const double dperiod = std::abs(a.period - b.period) / b.period;
    const double dymin = std::abs(a.y_min - b.y_min) / std::abs(b.y_min);
    const double dymax = std::abs(a.y_max - b.y_max) / std::abs(b.y_max);
    const bool ok = a.kind == CycleKind::relaxation && a.y_min < 0.6 &&
                    a.y_max > 1.0 && dperiod < 1e-3 && dymin < 1e-3 &&
                    dymax < 1e-3 && (1.0 - a.y_min) > 0.0 &&
                    (1.0 - a.y_max) < 0.0;
    return {ok, fmt("period %.4g, y in [%.4g, %.4g], tolerance-halving "
                    "shifts %.2g/%.2g/%.2g, psi changes sign",
                    a.period, a.y_min, a.y_max, dperiod, dymin, dymax)};
}

std::pair<bool, std::string> c5_canard_dichotomy() {
    const IntegratorConfig cfg;
    const double d0 = 0.01;
    const CycleReport cc = find_limit_cycle(params_of(1.1, 0.995, d0), cfg);
    const CycleReport se = find_limit_cycle(params_of(1.5, 0.995, d0), cfg);
    if (!cc.converged || !se.converged)
        return {false, "a cycle did not converge"};
    const bool cc_ok = cc.kind == CycleKind::canard_cycle &&
                       cc.canard.has_value() &&
                       cc.canard->duration_slow >= 0.1 &&
                       cc.canard->max_distance < 3.0 * std::sqrt(d0);
    const bool se_ok =
        se.kind == CycleKind::relaxation && se.y_min < 5.0 / 6.0;
    const double amp_cc = cc.y_max - cc.y_min;
    const double amp_se = se.y_max - se.y_min;
    return {cc_ok && se_ok && amp_cc < amp_se,
            fmt("A=1.1: %s, segment slow-time %.3g, dist %.3g; A=1.5: %s, "
                "y_min %.4g; amplitudes %.4g < %.4g",
                to_string(cc.kind), cc.canard ? cc.canard->duration_slow : 0.0,
                cc.canard ? cc.canard->max_distance : 0.0, to_string(se.kind),
                se.y_min, amp_cc, amp_se)};
}

std::pair<bool, std::string> c6_super_explosion_jump() {
    const IntegratorConfig cfg;
    const double d0 = 0.01;
    std::vector<double> grid;
    for (int k = 0; k <= 24; ++k)
        grid.push_back(0.994 + 2.5e-4 * k);

    // Amplitude must jump straight past the canard scale: ten times
    // sqrt(delta0) times the corner-to-fold width, i.e. (1 - 5/6) at these
    // parameters.
    const double width15 = 1.0 - 5.0 / 6.0;
    const double jump_threshold = 10.0 * std::sqrt(d0) * width15;

    const BifurcationDiagram dse = sweep_lambda(1.5, d0, grid, cfg, 1);
    bool above_ok = true, jump_ok = true, no_small = true;
    double first_amp = -1.0;
    for (const auto& pt : dse.points) {
        if (!pt.error.empty())
            return {false, "sweep error at lambda=" + std::to_string(pt.lambda)};
        if (pt.lambda >= 1.0) {
            above_ok = above_ok && !pt.cycle.converged;
        } else if (pt.cycle.converged) {
            const double amp = pt.cycle.y_max - pt.cycle.y_min;
            if (amp < jump_threshold)
                no_small = false;
            first_amp = amp; // last assignment = largest lambda below 1
        }
    }
    jump_ok = first_amp > jump_threshold;

    const BifurcationDiagram dcc = sweep_lambda(1.1, d0, grid, cfg, 1);
    const double width11 = 1.0 - (1.0 + 1.1) / (2.0 * 1.1);
    double cc_first = -1.0, cc_max = -1.0;
    for (const auto& pt : dcc.points)
        if (pt.lambda < 1.0 && pt.cycle.converged) {
            const double amp = pt.cycle.y_max - pt.cycle.y_min;
            cc_first = amp; // largest converged lambda below 1
            cc_max = std::max(cc_max, amp);
        }
    const bool canard_growth =
        cc_first > 0.0 && cc_first < width11 && cc_max > 2.0 * cc_first;

    return {above_ok && jump_ok && no_small && canard_growth,
            fmt("A=1.5: no cycles at lambda>=1 %s, first amplitude %.4g > "
                "%.4g, no smaller cycles %s; A=1.1: first %.4g grows to %.4g",
                above_ok ? "yes" : "NO", first_amp, jump_threshold,
                no_small ? "yes" : "NO", cc_first, cc_max)};
}

std::pair<bool, std::string> c7_three_timescale() {
    ModelParams p;
    p.A = 5.0;
    p.epsilon = 0.01;
    p.delta0 = 0.1;
    p.b = 5.0;
    p.lambda = 0.8;
    p.sync_a_from_lambda();   // a = 3
    p.sync_delta_from_delta0();
    const IntegratorConfig cfg;
    const PiecewiseVectorField f3 = make_lin3_field(p);
    const double s0[3] = {0.6, 0.5, 1.5};
    const Trajectory tr = integrate(f3, s0, 0.0, 40000.0, cfg);

    double supx = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i)
        if (tr.times[i] >= 10.0)
            supx = std::max(supx, std::abs(tr.state(i)[0] - 1.0));

    auto fn = [](std::span<const double> s) { return s[1] - 1.0; };
    const auto crossings = section_crossings(tr, fn, +1);
    if (crossings.size() < 3)
        return {false, "too few section crossings in the 3D run"};
    const std::size_t n = crossings.size();
    const double spacing_fast = 0.5 * (crossings[n - 1].tau - crossings[n - 3].tau);
    const double period3 = spacing_fast * p.epsilon;

    const CycleReport red = find_limit_cycle(params_of(5.0, 0.8, 0.1), cfg);
    if (!red.converged)
        return {false, "reduced cycle did not converge"};
    const double rel = std::abs(period3 - red.period) / red.period;
    return {supx <= 5.0 * p.epsilon && rel < 0.05,
            fmt("sup|x-1| = %.4g (bound %.3g), period %.4g vs reduced %.4g "
                "(%.2f%%)",
                supx, 5.0 * p.epsilon, period3, red.period, 100.0 * rel)};
}

std::pair<bool, std::string> c8_forced_modulation() {
    const ForcingSpec f;
    const IntegratorConfig cfg;
    const ForcedRunResult run = forced_run(f, 0.07, {0.0, 1620.0}, cfg);

    std::vector<double> env, As;
    for (std::size_t i = 0; i < run.stats.envelope_tau.size(); ++i) {
        const double tau = run.stats.envelope_tau[i];
        if (tau < 100.0)
            continue; // transient
        env.push_back(run.stats.envelope_amp[i]);
        As.push_back(forcing_A(f, tau));
    }
    const double corr = pearson(env, As);

    int quiet = 0;
    for (std::size_t i = 1; i < run.stats.episodes.size(); ++i)
        if (run.stats.episodes[i].t_start - run.stats.episodes[i - 1].t_end >
            50.0)
            ++quiet;
    const bool ok =
        corr > 0.3 && run.stats.count_large >= 2 && quiet >= 1;
    return {ok, fmt("envelope-A correlation %.3f, %d large episodes, %d "
                    "quiet spells",
                    corr, run.stats.count_large, quiet)};
}

std::pair<bool, std::string> c9_integrator_quality() {
    // Smooth problems: measured order within 0.3 of nominal (5).
    Region decay{0u, "all",
                 [](double, std::span<const double> s, std::span<double> ds) {
                     ds[0] = -s[0];
                 }};
    const PiecewiseVectorField fdecay(1, {}, {decay});
    Region rot{0u, "all",
               [](double, std::span<const double> s, std::span<double> ds) {
                   ds[0] = -s[1];
                   ds[1] = s[0];
               }};
    const PiecewiseVectorField frot(2, {}, {rot});
    const double y1[1] = {1.0};
    const double y2[2] = {1.0, 0.0};
    const double p1 = convergence_order(fdecay, y1, 0.0, 1.0);
    const double p2 = convergence_order(frot, y2, 0.0, 2.0);

    // Event accuracy on the linear crossing problem.
    auto sw = [](std::span<const double> s) { return s[0] - 1.0; };
    Region ramp{0u, "y < 1",
                [](double, std::span<const double>, std::span<double> ds) {
                    ds[0] = 1.0;
                }};
    Region ramp2{1u, "y >= 1",
                 [](double, std::span<const double>, std::span<double> ds) {
                     ds[0] = 1.0;
                 }};
    const PiecewiseVectorField framp(1, {sw}, {ramp, ramp2});
    const double y0[1] = {0.5};
    const Trajectory tr = integrate(framp, y0, 0.0, 1.0, IntegratorConfig{});
    const double ev_err =
        tr.events.size() == 1 ? std::abs(tr.events[0].time - 0.5) : 1.0;

    // The same kinked field without a declared switching function: the
    // measured order must degrade (this is why events are localized).
    Region kink{0u, "all",
                [](double, std::span<const double> s, std::span<double> ds) {
                    ds[0] = 1.0 + std::abs(s[0]);
                }};
    const PiecewiseVectorField fkink(1, {}, {kink});
    const double yk[1] = {-0.5};
    const double pk = convergence_order(fkink, yk, 0.0, 1.0);

    const bool ok = std::abs(p1 - 5.0) < 0.3 && std::abs(p2 - 5.0) < 0.3 &&
                    ev_err < 1e-10 && pk < 4.0;
    return {ok, fmt("orders %.2f, %.2f (nominal 5); event error %.2g; "
                    "undetected-kink order %.2f",
                    p1, p2, ev_err, pk)};
}

std::pair<bool, std::string> c10_equilibria_count() {
    std::mt19937_64 rng(110);
    std::uniform_real_distribution<double> uA(0.2, 6.0);
    std::uniform_real_distribution<double> umu(0.05, 2.8);
    int done = 0;
    while (done < 500) {
        const double A = uA(rng);
        const double mu = umu(rng);
        if (std::abs(mu - 1.0) < 1e-3 || std::abs(A - 1.0) < 1e-3)
            continue;
        if (A > 1.0) {
            const double mu_fold = (1.0 + A) * (1.0 + A) / (4.0 * A);
            if (std::abs(mu - mu_fold) < 1e-3)
                continue;
        }
        const auto roots = equilibria_of_2d(mu, A);
        bool separated = true;
        for (std::size_t i = 1; i < roots.size(); ++i)
            if (roots[i].y - roots[i - 1].y < 1e-3)
                separated = false;
        if (!separated)
            continue;
        ++done;

        const bool bistable =
            A > 1.0 && mu > 1.0 &&
            mu < (1.0 + A) * (1.0 + A) / (4.0 * A);
        const std::size_t expected = bistable ? 3 : 1;
        if (roots.size() != expected)
            return {false, fmt("count %zu != %zu at A=%g mu=%g", roots.size(),
                               expected, A, mu)};

        // Brute-force sign-change scan over y in [0, 3], grid 1e-4.
        int scan = 0;
        double prev = mu - critical_manifold_mu(0.0, A);
        for (double y = 1e-4; y <= 3.0 + 5e-5; y += 1e-4) {
            const double cur = mu - critical_manifold_mu(y, A);
            if (prev * cur < 0.0 || prev == 0.0)
                ++scan;
            prev = cur;
        }
        if (scan != static_cast<int>(roots.size()))
            return {false, fmt("scan found %d, solver %zu at A=%g mu=%g",
                               scan, roots.size(), A, mu)};
        for (const auto& r : roots)
            if (std::abs(mu - critical_manifold_mu(r.y, A)) > 1e-10)
                return {false, fmt("root residual too large at A=%g mu=%g",
                                   A, mu)};
    }
    return {true, "500 samples match the sign-scan oracle"};
}

std::pair<bool, std::string> c11_cli_contract() {
    const char* bin = std::getenv("OCIRC_BIN");
    if (!bin)
        return {false, "OCIRC_BIN is not set"};
    auto run = [&](const std::string& args, std::string* out = nullptr) {
        const std::string path = "acceptance_cli.tmp";
        const int rc = std::system(
            (std::string(bin) + " " + args + " > " + path + " 2>/dev/null")
                .c_str());
        if (out) {
            std::ifstream in(path, std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            *out = ss.str();
        }
        std::remove(path.c_str());
        return WEXITSTATUS(rc);
    };

    const std::string cmd = "simulate --model reduced --A 5 --lambda 0.8 "
                            "--delta0 0.1 --t-end 60 --seed 4";
    std::string out1, out2;
    if (run(cmd, &out1) != 0)
        return {false, "simulate exited nonzero"};
    if (run(cmd, &out2) != 0)
        return {false, "repeat simulate exited nonzero"};
    const bool deterministic = out1 == out2;

    // Round trip: parse and re-serialize to identical bytes.
    std::istringstream is(out1);
    const ParsedTrajectory parsed = read_trajectory_csv(is);
    const std::string meta = out1.substr(2, out1.find('\n') - 2);
    std::ostringstream os;
    write_trajectory_csv(os, parsed.traj, parsed.columns, meta);
    const bool round_trip = os.str() == out1;

    const int usage = run("simulate --model reduced --A 5 --delta0 0.1 "
                          "--t-end 10");
    const int numerical =
        run("simulate --model reduced --A 5 --lambda 0.8 --delta0 0.1 "
            "--t-end 1000 --max-steps 50");
    const bool ok =
        deterministic && round_trip && usage == 2 && numerical == 3;
    return {ok, fmt("deterministic %s, round-trip %s, exit codes %d/%d",
                    deterministic ? "yes" : "NO", round_trip ? "yes" : "NO",
                    usage, numerical)};
}

} // namespace

int main() {
    Harness h;
    h.run(1, "exact 4-box to 2-box reduction", c1_reduction_identity);
    h.run(2, "analytic Jacobian vs finite differences", c2_jacobian);
    h.run(3, "regime classification vs long-run simulation", c3_regime_grid);
    h.run(4, "reference relaxation oscillation (A=5)", c4_relaxation_reference);
    h.run(5, "canard vs super-explosion dichotomy", c5_canard_dichotomy);
    h.run(6, "super-explosion amplitude jump", c6_super_explosion_jump);
    h.run(7, "three-timescale consistency", c7_three_timescale);
    h.run(8, "forced-run amplitude modulation", c8_forced_modulation);
    h.run(9, "integrator order and event accuracy", c9_integrator_quality);
    h.run(10, "planar equilibria count", c10_equilibria_count);
    h.run(11, "CLI determinism, round trip, exit codes", c11_cli_contract);

    if (h.failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criteria FAILED\n", h.failures);
    return h.failures;
}
