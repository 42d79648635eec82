#include "ocirc/cycles.hpp"

#include "ocirc/models.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace ocirc {

namespace {

constexpr double kBudgetFactor = 50.0;   // time budget = 50 / delta0
constexpr double kChunkFactor = 10.0;    // integration chunk = 10 / delta0
constexpr double kMinCycleExtent = 1e-4; // below this a "cycle" is the equilibrium

inline bool nonneg(double g) { return g >= 0.0; }

} // namespace

const char* to_string(CycleKind k) {
    switch (k) {
    case CycleKind::relaxation: return "relaxation";
    case CycleKind::canard_cycle: return "canard-cycle";
    case CycleKind::none: return "none";
    }
    return "?";
}

std::vector<SectionCrossing>
section_crossings(const Trajectory& traj,
                  const std::function<double(std::span<const double>)>& fn,
                  int direction) {
    std::vector<SectionCrossing> out;
    if (traj.size() < 2 || traj.seg_t0.empty())
        return out;
    const std::size_t n = static_cast<std::size_t>(traj.dim);
    constexpr int kScan = 8;
    std::vector<double> probe(n);
    for (std::size_t seg = 0; seg + 1 < traj.size(); ++seg) {
        const double ta = traj.times[seg], tb = traj.times[seg + 1];
        bool prev_class = nonneg(fn(traj.state(seg)));
        double t_prev = ta;
        for (int j = 1; j <= kScan; ++j) {
            const double tj = std::min(tb, ta + (tb - ta) * j / kScan);
            double gj;
            if (j == kScan)
                gj = fn(traj.state(seg + 1));
            else {
                probe = dense_eval(traj, tj);
                gj = fn(probe);
            }
            const bool cls = nonneg(gj);
            if (cls != prev_class) {
                const int dir = prev_class ? -1 : +1;
                if (direction == 0 || dir == direction) {
                    double lo = t_prev, hi = tj;
                    while (hi - lo > 1e-12 * std::max(1.0, std::abs(hi))) {
                        const double mid = 0.5 * (lo + hi);
                        probe = dense_eval(traj, mid);
                        if (nonneg(fn(probe)) == prev_class)
                            lo = mid;
                        else
                            hi = mid;
                    }
                    out.push_back({hi, dense_eval(traj, hi)});
                }
                prev_class = cls;
            }
            t_prev = tj;
        }
    }
    return out;
}

namespace {

// Shared crossing collector for poincare_crossings and find_limit_cycle.
// Primary section: upward crossings of y = 1 with mu > 1 (these are exactly
// the integrator's switching events). Fallback after a crossing-free probe:
// downward crossings of mu = F(lambda) with y > lambda.
struct CrossingRun {
    std::vector<SectionCrossing> crossings;
    std::vector<double> coords; // mu on the primary section, y on the fallback
    bool used_fallback = false;
    bool budget_exhausted = false;
    bool converged = false;
    std::array<double, 2> last_state{};
    double last_time = 0.0;
};

CrossingRun collect_crossings(const ModelParams& params,
                              std::array<double, 2> s0,
                              const IntegratorConfig& cfg, int max_n,
                              double conv_tol) {
    const PiecewiseVectorField field = make_reduced_field(params);
    const double budget = kBudgetFactor / params.delta0;
    const double chunk = kChunkFactor / params.delta0;
    const double mu_nullcline = critical_manifold_mu(params.lambda, params.A);
    auto fallback_fn = [&](std::span<const double> s) {
        return s[1] - mu_nullcline;
    };

    CrossingRun run;
    run.last_state = s0;
    std::vector<double> y(s0.begin(), s0.end());
    double t = 0.0;
    // The section is committed to whichever produces the first crossing:
    // primary {y = 1, mu > 1, upward} during the probe chunk, otherwise the
    // fallback {mu = F(lambda), y > lambda, mu decreasing}.
    enum class Section { undecided, primary, fallback } section = Section::undecided;
    while (t < budget) {
        const double t_next = std::min(t + chunk, budget);
        Trajectory traj = integrate(field, y, t, t_next, cfg);

        std::vector<SectionCrossing> found;
        auto collect_primary = [&] {
            for (const auto& ev : traj.events) {
                if (ev.index != 0 || ev.direction != +1)
                    continue;
                auto s = dense_eval(traj, ev.time);
                if (s[1] > 1.0)
                    found.push_back({ev.time, std::move(s)});
            }
        };
        auto collect_fallback = [&] {
            // The equilibrium sits on this section; integration noise around
            // it produces flips with y - lambda at rounding scale. Require a
            // minimally transversal crossing.
            for (auto& c : section_crossings(traj, fallback_fn, -1))
                if (c.state[0] > params.lambda + 1e-6)
                    found.push_back(std::move(c));
        };
        if (section == Section::undecided) {
            collect_primary();
            if (!found.empty()) {
                section = Section::primary;
            } else {
                collect_fallback();
                if (!found.empty()) {
                    section = Section::fallback;
                    run.used_fallback = true;
                }
            }
        } else if (section == Section::primary) {
            collect_primary();
        } else {
            collect_fallback();
        }

        for (auto& c : found) {
            const double coord =
                section == Section::fallback ? c.state[0] : c.state[1];
            const bool settles = !run.coords.empty() && conv_tol > 0.0 &&
                                 std::abs(coord - run.coords.back()) < conv_tol;
            run.coords.push_back(coord);
            run.crossings.push_back(std::move(c));
            if (settles) {
                run.converged = true;
                break;
            }
            if (static_cast<int>(run.crossings.size()) >= max_n)
                break;
        }
        const auto back = traj.back();
        y.assign(back.begin(), back.end());
        run.last_state = {y[0], y[1]};
        run.last_time = traj.times.back();
        t = t_next;
        if (run.converged || static_cast<int>(run.crossings.size()) >= max_n)
            return run;
    }
    run.budget_exhausted = true;
    return run;
}

} // namespace

PoincareResult poincare_crossings(const ModelParams& params,
                                  std::array<double, 2> s0, int n,
                                  const IntegratorConfig& cfg) {
    if (n < 1)
        throw std::invalid_argument("poincare_crossings: need n >= 1");
    params.validate();
    CrossingRun run = collect_crossings(params, s0, cfg, n, /*conv_tol=*/0.0);
    if (run.crossings.empty())
        throw NoCrossingError(
            "poincare_crossings: no section crossings within the time budget");
    return {std::move(run.crossings), run.used_fallback, run.budget_exhausted};
}

CycleClassification classify_cycle(const Trajectory& cycle,
                                   const ModelParams& params, double kappa,
                                   double d_min) {
    CycleClassification out;
    if (!(params.A > 1.0))
        return out; // no repelling branch, nothing to track
    const FoldPoint fold = fold_point(params.A);
    const double tube = kappa * std::sqrt(params.delta0);

    // Polyline of the repelling branch {mu = F_plus(y), y in (y_f, 1)}.
    constexpr int kBranchPts = 1024;
    std::vector<double> by(kBranchPts), bmu(kBranchPts);
    for (int i = 0; i < kBranchPts; ++i) {
        by[i] = fold.y + (1.0 - fold.y) * (i + 0.5) / kBranchPts;
        bmu[i] = F_plus(by[i], params.A);
    }
    auto branch_distance = [&](double y, double mu) {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < kBranchPts; ++i) {
            const double dy = y - by[i], dm = mu - bmu[i];
            best = std::min(best, dy * dy + dm * dm);
        }
        return std::sqrt(best);
    };

    const double t0 = cycle.times.front(), t1 = cycle.times.back();
    const double dt =
        std::min(0.5, std::max(1e-3, d_min / (20.0 * params.delta0)));
    const int nsamp = std::max(16, static_cast<int>((t1 - t0) / dt));

    double y_min = std::numeric_limits<double>::infinity();
    std::vector<char> inside(nsamp + 1);
    std::vector<double> dist(nsamp + 1), tgrid(nsamp + 1);
    for (int i = 0; i <= nsamp; ++i) {
        const double t = std::min(t1, t0 + (t1 - t0) * i / nsamp);
        const auto s = dense_eval(cycle, t);
        tgrid[i] = t;
        dist[i] = branch_distance(s[0], s[1]);
        inside[i] = dist[i] < tube;
        y_min = std::min(y_min, s[0]);
    }

    // Maximal in-tube runs; the pair of runs touching the cycle's endpoints
    // is one wrapped segment (the section anchor can sit inside it).
    struct Run {
        double onset, duration, max_dist;
    };
    std::vector<Run> runs;
    int i = 0;
    while (i <= nsamp) {
        if (!inside[i]) {
            ++i;
            continue;
        }
        int j = i;
        double dmax = 0.0;
        while (j <= nsamp && inside[j]) {
            dmax = std::max(dmax, dist[j]);
            ++j;
        }
        runs.push_back({tgrid[i], tgrid[j - 1] - tgrid[i], dmax});
        i = j;
    }
    if (runs.size() >= 2 && inside[0] && inside[nsamp]) {
        const Run head = runs.front(), tail = runs.back();
        runs.pop_back();
        runs.front() = {tail.onset, tail.duration + head.duration,
                        std::max(head.max_dist, tail.max_dist)};
    }

    const Run* best = nullptr;
    for (const auto& r : runs) {
        if (params.delta0 * r.duration >= d_min &&
            (!best || r.duration > best->duration))
            best = &r;
    }
    if (best)
        out.canard = CanardSegment{best->onset, params.delta0 * best->duration,
                                   best->max_dist};
    out.kind = (out.canard && y_min > fold.y) ? CycleKind::canard_cycle
                                              : CycleKind::relaxation;
    return out;
}

CycleReport find_limit_cycle(const ModelParams& params,
                             const IntegratorConfig& cfg, double conv_tol) {
    CycleSearch search;
    search.conv_tol = conv_tol;
    return find_limit_cycle(params, cfg, search, nullptr);
}

CycleReport find_limit_cycle(const ModelParams& params,
                             const IntegratorConfig& cfg,
                             const CycleSearch& search,
                             std::array<double, 2>* final_state) {
    params.validate();
    CycleReport rep;
    const std::array<double, 2> s0 =
        search.initial_state.value_or(std::array<double, 2>{0.5, 1.5});
    if (final_state)
        *final_state = s0;

    CrossingRun run =
        collect_crossings(params, s0, cfg, search.max_crossings, search.conv_tol);
    if (final_state)
        *final_state = run.last_state;
    if (!run.converged)
        return rep; // ceased, never crossed, or never settled

    const SectionCrossing& anchor = run.crossings.back();
    rep.section_value = run.coords.back();

    // One full return from the anchor measures period and extrema. The flow
    // is autonomous, so the loop is integrated from time zero.
    const PiecewiseVectorField field = make_reduced_field(params);
    const double window = 2.0 * kChunkFactor / params.delta0;
    const double t_guard = 1e-6 / params.delta0;
    Trajectory loop = integrate(field, anchor.state, 0.0, window, cfg);

    double period = -1.0;
    if (!run.used_fallback) {
        for (const auto& ev : loop.events)
            if (ev.index == 0 && ev.direction == +1 && ev.time > t_guard) {
                period = ev.time;
                break;
            }
    } else {
        const double mu_nullcline =
            critical_manifold_mu(params.lambda, params.A);
        auto fn = [&](std::span<const double> s) { return s[1] - mu_nullcline; };
        for (const auto& c : section_crossings(loop, fn, -1))
            if (c.tau > t_guard && c.state[0] > params.lambda + 1e-6) {
                period = c.tau;
                break;
            }
    }
    if (period <= 0.0)
        return rep;

    // Extrema over [0, period], sampled inside every dense segment.
    double y_min = anchor.state[0], y_max = anchor.state[0];
    double mu_min = anchor.state[1], mu_max = anchor.state[1];
    constexpr int kPerSeg = 16;
    for (std::size_t seg = 0; seg + 1 < loop.size(); ++seg) {
        if (loop.times[seg] > period)
            break;
        const double ta = loop.times[seg];
        const double tb = std::min(loop.times[seg + 1], period);
        for (int j = 0; j <= kPerSeg; ++j) {
            const auto s =
                dense_eval(loop, std::min(tb, ta + (tb - ta) * j / kPerSeg));
            y_min = std::min(y_min, s[0]);
            y_max = std::max(y_max, s[0]);
            mu_min = std::min(mu_min, s[1]);
            mu_max = std::max(mu_max, s[1]);
        }
    }
    if (y_max - y_min < kMinCycleExtent && mu_max - mu_min < kMinCycleExtent)
        return rep; // the crossings collapsed onto the equilibrium

    rep.converged = true;
    rep.period = period;
    rep.y_min = y_min;
    rep.y_max = y_max;
    rep.mu_min = mu_min;
    rep.mu_max = mu_max;

    // Classification sees exactly one period.
    Trajectory one_period = integrate(field, anchor.state, 0.0, period, cfg);
    const CycleClassification cls =
        classify_cycle(one_period, params, search.kappa, search.d_min);
    rep.kind = cls.kind;
    rep.canard = cls.canard;
    if (final_state)
        *final_state = {anchor.state[0], anchor.state[1]};
    return rep;
}

BifurcationDiagram sweep_lambda(double A, double delta0,
                                std::span<const double> lambda_grid,
                                const IntegratorConfig& cfg, int jobs) {
    if (lambda_grid.empty())
        throw std::invalid_argument("sweep_lambda: empty grid");
    const bool descending =
        lambda_grid.size() >= 2 && lambda_grid[1] < lambda_grid[0];
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        if (!(lambda_grid[i] > 0.0 && lambda_grid[i] < 2.0))
            throw std::invalid_argument("sweep_lambda: grid must lie in (0, 2)");
        if (i > 0) {
            const bool ok = descending ? lambda_grid[i] < lambda_grid[i - 1]
                                       : lambda_grid[i] > lambda_grid[i - 1];
            if (!ok)
                throw std::invalid_argument(
                    "sweep_lambda: grid must be strictly monotone");
        }
    }
    // Continuation follows the order given; a descending grid sweeps from
    // high lambda down. The returned diagram is normalized to ascending.
    BifurcationDiagram diagram;
    diagram.lambda_grid.assign(lambda_grid.begin(), lambda_grid.end());
    diagram.points.resize(lambda_grid.size());

    const int n = static_cast<int>(lambda_grid.size());
    jobs = std::max(1, std::min(jobs, n));
    auto work = [&](int lo, int hi) {
        std::optional<std::array<double, 2>> seed;
        for (int k = lo; k < hi; ++k) {
            LambdaPoint& pt = diagram.points[static_cast<std::size_t>(k)];
            pt.lambda = lambda_grid[static_cast<std::size_t>(k)];
            ModelParams p;
            p.A = A;
            p.delta0 = delta0;
            p.lambda = pt.lambda;
            try {
                pt.eq = equilibrium(p);
                CycleSearch search;
                search.initial_state = seed;
                std::array<double, 2> fin{};
                pt.cycle = find_limit_cycle(p, cfg, search, &fin);
                seed = fin;
            } catch (const std::exception& e) {
                pt.error = e.what();
                seed.reset();
            }
        }
    };
    if (jobs == 1) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) {
            const int lo = n * w / jobs, hi = n * (w + 1) / jobs;
            pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool)
            th.join();
    }
    if (descending) {
        std::reverse(diagram.lambda_grid.begin(), diagram.lambda_grid.end());
        std::reverse(diagram.points.begin(), diagram.points.end());
    }
    return diagram;
}

ExcursionStats count_large_excursions(std::span<const double> tau,
                                      std::span<const double> psi,
                                      double threshold, double min_gap) {
    if (tau.empty() || tau.size() != psi.size())
        throw std::invalid_argument("count_large_excursions: empty or misaligned series");
    ExcursionStats stats;
    stats.threshold = threshold;
    stats.min_gap = min_gap;
    double mean = 0.0;
    for (double v : psi)
        mean += v;
    mean /= static_cast<double>(psi.size());
    stats.mean = mean;

    std::vector<std::pair<double, double>> raw; // (t_start, t_end)
    std::size_t i = 0;
    const std::size_t n = psi.size();
    while (i < n) {
        if (psi[i] - mean > threshold) {
            std::size_t j = i;
            while (j + 1 < n && psi[j + 1] - mean > threshold)
                ++j;
            raw.emplace_back(tau[i], tau[j]);
            i = j + 1;
        } else {
            ++i;
        }
    }
    std::vector<std::pair<double, double>> merged;
    for (const auto& e : raw) {
        if (!merged.empty() && e.first - merged.back().second < min_gap)
            merged.back().second = e.second;
        else
            merged.push_back(e);
    }
    for (const auto& [a, b] : merged) {
        Episode ep{a, b, std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()};
        for (std::size_t k = 0; k < n; ++k)
            if (tau[k] >= a && tau[k] <= b) {
                ep.psi_min = std::min(ep.psi_min, psi[k]);
                ep.psi_max = std::max(ep.psi_max, psi[k]);
            }
        stats.episodes.push_back(ep);
    }
    stats.count_large = static_cast<int>(stats.episodes.size());
    return stats;
}

void amplitude_envelope(std::span<const double> tau,
                        std::span<const double> psi, double window,
                        std::vector<double>& env_tau,
                        std::vector<double>& env_amp) {
    env_tau.clear();
    env_amp.clear();
    const std::size_t n = tau.size();
    double mean = 0.0;
    for (double v : psi)
        mean += v;
    mean /= static_cast<double>(n);
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (lo < n && tau[lo] < tau[i] - 0.5 * window)
            ++lo;
        while (hi + 1 < n && tau[hi + 1] <= tau[i] + 0.5 * window)
            ++hi;
        double mx = 0.0;
        for (std::size_t k = lo; k <= hi; ++k)
            mx = std::max(mx, psi[k] - mean);
        env_tau.push_back(tau[i]);
        env_amp.push_back(mx);
    }
}

ForcedRunResult forced_run(const ForcingSpec& f, double delta0,
                           std::pair<double, double> t_span,
                           const IntegratorConfig& cfg,
                           std::optional<double> threshold, double min_gap,
                           std::optional<std::array<double, 2>> s0,
                           double envelope_window) {
    f.validate();
    ModelParams params;
    params.delta0 = delta0;
    const PiecewiseVectorField field = make_forced_field(params, f);
    const std::array<double, 2> start = s0.value_or(std::array<double, 2>{0.5, 1.0});

    ForcedRunResult out;
    out.traj = integrate(field, start, t_span.first, t_span.second, cfg);
    out.psi.reserve(out.traj.size());
    for (std::size_t i = 0; i < out.traj.size(); ++i)
        out.psi.push_back(1.0 - out.traj.state(i)[0]);

    // Uniform resampling for episode detection and the envelope.
    constexpr double kResample = 0.25;
    const double ta = t_span.first, tb = t_span.second;
    const int nu = std::max(2, static_cast<int>((tb - ta) / kResample));
    std::vector<double> ut(static_cast<std::size_t>(nu) + 1),
        up(static_cast<std::size_t>(nu) + 1);
    for (int i = 0; i <= nu; ++i) {
        ut[static_cast<std::size_t>(i)] = std::min(tb, ta + (tb - ta) * i / nu);
        up[static_cast<std::size_t>(i)] =
            1.0 - dense_eval(out.traj, ut[static_cast<std::size_t>(i)])[0];
    }
    double thr;
    if (threshold) {
        thr = *threshold;
    } else {
        // Half the half-range, floored so near-constant series (a settled
        // equilibrium) report no episodes from integration wobble.
        const auto [mn, mx] = std::minmax_element(up.begin(), up.end());
        thr = std::max(0.5 * (*mx - *mn) / 2.0, 1e-3);
    }
    out.stats = count_large_excursions(ut, up, thr, min_gap);
    amplitude_envelope(ut, up, envelope_window, out.stats.envelope_tau,
                       out.stats.envelope_amp);
    return out;
}

} // namespace ocirc
