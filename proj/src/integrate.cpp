#include "ocirc/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace ocirc {

namespace {

// Dormand-Prince 5(4) tableau (Hairer, Norsett & Wanner).
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                 c5 = 8.0 / 9.0;

constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                 a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;

constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// Dense-output coefficients.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kShrinkMin = 0.2;
constexpr double kGrowMax = 10.0;

struct Stepper {
    const PiecewiseVectorField& field;
    std::size_t n;
    std::vector<double> k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, yerr;

    explicit Stepper(const PiecewiseVectorField& f)
        : field(f), n(static_cast<std::size_t>(f.dim())), k1(n), k2(n), k3(n),
          k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), yerr(n) {}

    // One trial step from (t, y) with k1 already holding f(t, y).
    // Fills ynew, yerr, k2..k7 (k7 = f(t+h, ynew), FSAL).
    void attempt(double t, std::span<const double> y, double h) {
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * a21 * k1[i];
        field.evaluate(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        field.evaluate(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        field.evaluate(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] +
                                  a54 * k4[i]);
        field.evaluate(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                  a64 * k4[i] + a65 * k5[i]);
        field.evaluate(t + h, ytmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] +
                                  a75 * k5[i] + a76 * k6[i]);
        field.evaluate(t + h, ynew, k7);
        for (std::size_t i = 0; i < n; ++i)
            yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                           e6 * k6[i] + e7 * k7[i]);
    }

    double error_norm(std::span<const double> y, double rel_tol,
                      double abs_tol) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc =
                abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double r = yerr[i] / sc;
            sum += r * r;
        }
        return std::sqrt(sum / static_cast<double>(n));
    }

    // Dense coefficients of the accepted step into cont (5*n values).
    void build_cont(std::span<const double> y, double h,
                    std::span<double> cont) const {
        for (std::size_t i = 0; i < n; ++i) {
            const double ydiff = ynew[i] - y[i];
            const double bspl = h * k1[i] - ydiff;
            cont[i] = y[i];
            cont[n + i] = ydiff;
            cont[2 * n + i] = bspl;
            cont[3 * n + i] = ydiff - h * k7[i] - bspl;
            cont[4 * n + i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] +
                                   d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
    }
};

void eval_cont(std::span<const double> cont, std::size_t n, double theta,
               std::span<double> out) {
    const double th1 = 1.0 - theta;
    for (std::size_t i = 0; i < n; ++i)
        out[i] = cont[i] +
                 theta * (cont[n + i] +
                          th1 * (cont[2 * n + i] +
                                 theta * (cont[3 * n + i] +
                                          th1 * cont[4 * n + i])));
}

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x))
            return false;
    return true;
}

double initial_step(const PiecewiseVectorField& field, double t0,
                    std::span<const double> y0, std::span<const double> f0,
                    double rel_tol, double abs_tol, double span) {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < y0.size(); ++i) {
        const double sc = abs_tol + rel_tol * std::abs(y0[i]);
        dnf += (f0[i] / sc) * (f0[i] / sc);
        dny += (y0[i] / sc) * (y0[i] / sc);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10)
                   ? 1e-6
                   : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, span);
    // One explicit Euler probe to bound the second derivative.
    std::vector<double> y1(y0.size()), f1(y0.size());
    for (std::size_t i = 0; i < y0.size(); ++i)
        y1[i] = y0[i] + h * f0[i];
    field.evaluate(t0 + h, y1, f1);
    double der2 = 0.0;
    for (std::size_t i = 0; i < y0.size(); ++i) {
        const double sc = abs_tol + rel_tol * std::abs(y0[i]);
        const double d = (f1[i] - f0[i]) / sc;
        der2 += d * d;
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(der2, std::sqrt(dnf));
    double h1 = (der12 <= 1e-15)
                    ? std::max(1e-6, h * 1e-3)
                    : std::pow(0.01 / der12, 1.0 / 5.0);
    return std::min({100.0 * h, h1, span});
}

// Sign class with the tie-break convention: zero lies on the ">=" side.
inline bool nonneg(double g) { return g >= 0.0; }

} // namespace

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0 && abs_tol > 0.0 && event_tol > 0.0 && max_step > 0.0))
        throw DegenerateParamsError("IntegratorConfig: tolerances must be positive");
    if (!(event_tol <= rel_tol))
        throw DegenerateParamsError("IntegratorConfig: event_tol must be <= rel_tol");
    if (max_steps <= 0)
        throw DegenerateParamsError("IntegratorConfig: max_steps must be positive");
}

Trajectory integrate(const PiecewiseVectorField& field,
                     std::span<const double> s0, double t0, double t1,
                     const IntegratorConfig& cfg) {
    cfg.validate();
    if (!(t1 > t0))
        throw std::invalid_argument("integrate: need t1 > t0");
    const std::size_t n = static_cast<std::size_t>(field.dim());
    if (s0.size() != n)
        throw DimensionMismatchError("integrate: initial state has wrong length");

    Trajectory traj;
    traj.dim = field.dim();
    traj.times.push_back(t0);
    traj.states.assign(s0.begin(), s0.end());

    Stepper st(field);
    std::vector<double> y(s0.begin(), s0.end());
    std::vector<double> cont(5 * n), probe(n);
    const std::size_t nsw = field.num_switches();
    std::vector<double> g_start(nsw);

    double t = t0;
    field.evaluate(t, y, st.k1);
    if (!all_finite(st.k1))
        throw DivergenceError("integrate: nonfinite right-hand side at t0");
    double h = initial_step(field, t, y, st.k1, cfg.rel_tol, cfg.abs_tol,
                            t1 - t0);
    h = std::min(h, cfg.max_step);
    for (std::size_t i = 0; i < nsw; ++i)
        g_start[i] = field.switch_value(i, y);

    long steps = 0;
    bool last_rejected = false;
    while (t < t1) {
        if (++steps > cfg.max_steps)
            throw BudgetError("integrate: max_steps exceeded at t = " +
                              std::to_string(t));
        const double h_min = 16.0 * std::numeric_limits<double>::epsilon() *
                             std::max(std::abs(t), 1.0);
        if (h < h_min)
            throw DivergenceError("integrate: step size underflow at t = " +
                                  std::to_string(t));
        bool final_step = false;
        if (t + h >= t1) {
            h = t1 - t;
            final_step = true;
        }

        st.attempt(t, y, h);
        if (!all_finite(st.ynew) || !all_finite(st.yerr)) {
            h *= kShrinkMin;
            last_rejected = true;
            continue;
        }
        const double err = st.error_norm(y, cfg.rel_tol, cfg.abs_tol);
        if (err > 1.0) {
            const double fac = std::max(
                kShrinkMin, kSafety * std::pow(err, -0.2));
            h *= fac;
            last_rejected = true;
            continue;
        }

        // Accepted. Look for the earliest switching-function sign change on
        // the dense output of this step.
        st.build_cont(y, h, cont);
        double t_event = std::numeric_limits<double>::infinity();
        int ev_index = -1, ev_direction = 0;
        if (nsw > 0) {
            constexpr int kScan = 8;
            for (std::size_t si = 0; si < nsw; ++si) {
                bool prev_class = nonneg(g_start[si]);
                double th_prev = 0.0;
                for (int j = 1; j <= kScan; ++j) {
                    const double th = static_cast<double>(j) / kScan;
                    double gj;
                    if (j == kScan) {
                        gj = field.switch_value(si, st.ynew);
                    } else {
                        eval_cont(cont, n, th, probe);
                        gj = field.switch_value(si, probe);
                    }
                    const bool cls = nonneg(gj);
                    if (cls != prev_class) {
                        // Bisect [th_prev, th] on the interpolant.
                        double lo = th_prev, hi = th;
                        while ((hi - lo) * h > cfg.event_tol) {
                            const double mid = 0.5 * (lo + hi);
                            eval_cont(cont, n, mid, probe);
                            if (nonneg(field.switch_value(si, probe)) ==
                                prev_class)
                                lo = mid;
                            else
                                hi = mid;
                        }
                        const double tc = t + hi * h;
                        if (tc < t_event) {
                            t_event = tc;
                            ev_index = static_cast<int>(si);
                            ev_direction = prev_class ? -1 : +1;
                        }
                        break;
                    }
                    prev_class = cls;
                    th_prev = th;
                }
            }
        }

        if (ev_index >= 0 && t_event > t) {
            // Truncate the step at the crossing and restart from there.
            const double theta = (t_event - t) / h;
            eval_cont(cont, n, theta, probe);
            traj.times.push_back(t_event);
            traj.states.insert(traj.states.end(), probe.begin(), probe.end());
            traj.seg_t0.push_back(t);
            traj.seg_h.push_back(h);
            traj.seg_cont.insert(traj.seg_cont.end(), cont.begin(), cont.end());
            traj.events.push_back({t_event, ev_index, ev_direction});

            y.assign(probe.begin(), probe.end());
            t = t_event;
            field.evaluate(t, y, st.k1);
            // Nudge along the flow until the crossed switching function sits
            // strictly on the post-crossing side, so the event is not
            // re-detected on the next step.
            {
                const std::size_t si = static_cast<std::size_t>(ev_index);
                double scale = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    scale = std::max(scale, std::abs(y[i]));
                double eta = 4.0 * std::numeric_limits<double>::epsilon() *
                             std::max(scale, 1.0);
                for (int tries = 0; tries < 64; ++tries) {
                    const double g = field.switch_value(si, y);
                    const bool ok = (ev_direction > 0) ? (g >= 0.0) : (g < 0.0);
                    if (ok)
                        break;
                    for (std::size_t i = 0; i < n; ++i)
                        y[i] += eta * st.k1[i];
                    eta *= 2.0;
                }
                field.evaluate(t, y, st.k1);
            }
            for (std::size_t i = 0; i < nsw; ++i)
                g_start[i] = field.switch_value(i, y);
            last_rejected = false;
            continue;
        }

        // Plain accepted step.
        traj.times.push_back(final_step ? t1 : t + h);
        traj.states.insert(traj.states.end(), st.ynew.begin(), st.ynew.end());
        traj.seg_t0.push_back(t);
        traj.seg_h.push_back(h);
        traj.seg_cont.insert(traj.seg_cont.end(), cont.begin(), cont.end());

        t = final_step ? t1 : t + h;
        y = st.ynew;
        st.k1 = st.k7; // FSAL
        for (std::size_t i = 0; i < nsw; ++i)
            g_start[i] = field.switch_value(i, y);

        double fac = kSafety * std::pow(std::max(err, 1e-32), -0.2);
        fac = std::min(last_rejected ? 1.0 : kGrowMax,
                       std::max(kShrinkMin, fac));
        h = std::min(h * fac, cfg.max_step);
        last_rejected = false;
    }

    return traj;
}

std::vector<double> dense_eval(const Trajectory& traj, double t) {
    if (traj.times.empty() || t < traj.times.front() || t > traj.times.back())
        throw std::out_of_range("dense_eval: t outside trajectory range");
    const std::size_t n = static_cast<std::size_t>(traj.dim);
    // Exact at stored samples.
    auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t);
    if (it != traj.times.end() && *it == t) {
        const std::size_t idx =
            static_cast<std::size_t>(it - traj.times.begin());
        auto s = traj.state(idx);
        return {s.begin(), s.end()};
    }
    if (traj.seg_t0.empty())
        throw std::out_of_range("dense_eval: trajectory carries no dense data");
    const std::size_t seg =
        static_cast<std::size_t>(it - traj.times.begin()) - 1;
    const double theta = (t - traj.seg_t0[seg]) / traj.seg_h[seg];
    std::vector<double> out(n);
    eval_cont({traj.seg_cont.data() + seg * 5 * n, 5 * n}, n, theta, out);
    return out;
}

std::vector<double> fixed_step_terminal(const PiecewiseVectorField& field,
                                        std::span<const double> s0, double t0,
                                        double t1, int n_steps) {
    if (n_steps <= 0)
        throw std::invalid_argument("fixed_step_terminal: n_steps must be positive");
    Stepper st(field);
    std::vector<double> y(s0.begin(), s0.end());
    const double h = (t1 - t0) / n_steps;
    double t = t0;
    field.evaluate(t, y, st.k1);
    for (int k = 0; k < n_steps; ++k) {
        st.attempt(t, y, h);
        y = st.ynew;
        st.k1 = st.k7;
        t = t0 + (k + 1) * h;
    }
    return y;
}

double convergence_order(const PiecewiseVectorField& field,
                         std::span<const double> s0, double t0, double t1,
                         int base_steps) {
    const auto y1 = fixed_step_terminal(field, s0, t0, t1, base_steps);
    const auto y2 = fixed_step_terminal(field, s0, t0, t1, 2 * base_steps);
    const auto y4 = fixed_step_terminal(field, s0, t0, t1, 4 * base_steps);
    double d12 = 0.0, d24 = 0.0;
    for (std::size_t i = 0; i < y1.size(); ++i) {
        d12 = std::max(d12, std::abs(y1[i] - y2[i]));
        d24 = std::max(d24, std::abs(y2[i] - y4[i]));
    }
    if (d24 == 0.0)
        return std::numeric_limits<double>::infinity();
    return std::log2(d12 / d24);
}

} // namespace ocirc
