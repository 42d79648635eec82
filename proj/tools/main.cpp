// Command-line front end: simulate / classify / sweep / forced.
//
// Exit codes: 0 success, 2 usage or input error, 3 numerical failure.

#include "ocirc/analysis.hpp"
#include "ocirc/core.hpp"
#include "ocirc/cycles.hpp"
#include "ocirc/integrate.hpp"
#include "ocirc/io.hpp"
#include "ocirc/models.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

namespace {

using namespace ocirc;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Cli {
    std::string model;
    std::optional<double> A, lambda, delta0, epsilon, mu, a, b;
    double t0 = 0.0;
    std::optional<double> t_end;
    IntegratorConfig icfg;
    long max_steps = 20'000'000;
    std::string format = "csv";
    std::string out;
    std::uint64_t seed = 0;

    // forcing
    std::optional<double> A_bar, p, lambda_bar, q, omega, theta;
    std::string obliquity_csv;
    double tau_per_kyr = 540.0 / 41.0;
    std::optional<double> threshold;
    double min_gap = 5.0;

    // sweep
    std::optional<double> lambda_min, lambda_max, step;
    int jobs = 1;

    // dimensional models
    DimensionalParams dim;
};

double require(const std::optional<double>& v, const char* flag) {
    if (!v)
        throw UsageError(std::string("missing required flag ") + flag);
    return *v;
}

ModelParams build_params(const Cli& cli, bool need_lambda, bool need_eps) {
    ModelParams p;
    p.A = require(cli.A, "--A");
    p.delta0 = cli.delta0.value_or(p.delta0);
    if (need_lambda)
        p.lambda = require(cli.lambda, "--lambda");
    else if (cli.lambda)
        p.lambda = *cli.lambda;
    if (need_eps)
        p.epsilon = require(cli.epsilon, "--epsilon");
    else if (cli.epsilon)
        p.epsilon = *cli.epsilon;
    if (cli.mu)
        p.mu = *cli.mu;
    if (cli.a && cli.b) {
        p.a = *cli.a;
        p.b = *cli.b;
        p.lambda = (1.0 + p.a) / p.b;
    } else if (cli.b) {
        p.b = *cli.b;
        p.sync_a_from_lambda();
    }
    p.sync_delta_from_delta0();
    return p;
}

ForcingSpec build_forcing(const Cli& cli) {
    ForcingSpec f; // defaults reproduce the reference forced run
    if (cli.A_bar)
        f.A_bar = *cli.A_bar;
    if (cli.p)
        f.p = *cli.p;
    if (cli.lambda_bar)
        f.lambda_bar = *cli.lambda_bar;
    if (cli.q)
        f.q = *cli.q;
    if (cli.omega)
        f.omega = *cli.omega;
    if (cli.theta)
        f.theta = *cli.theta;
    if (!cli.obliquity_csv.empty()) {
        std::ifstream in(cli.obliquity_csv);
        if (!in)
            throw UsageError("cannot open obliquity CSV: " + cli.obliquity_csv);
        const ObliquitySeries series = parse_obliquity_csv(in);
        f = obliquity_forcing(series, f, cli.tau_per_kyr);
    }
    f.validate();
    return f;
}

std::mt19937_64 rng_for(const Cli& cli) { return std::mt19937_64(cli.seed); }

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file.open(path, std::ios::binary);
            if (!file)
                throw UsageError("cannot open output file: " + path);
            os = &file;
        }
    }
};

std::string meta_params(const Cli& cli, const ModelParams& p) {
    std::ostringstream ss;
    ss << "model=" << cli.model << " seed=" << cli.seed << " A="
       << format_double(p.A) << " epsilon=" << format_double(p.epsilon)
       << " delta0=" << format_double(p.delta0) << " lambda="
       << format_double(p.lambda) << " mu=" << format_double(p.mu) << " a="
       << format_double(p.a) << " b=" << format_double(p.b) << " t0="
       << format_double(cli.t0) << " t_end=" << format_double(*cli.t_end)
       << " rel_tol=" << format_double(cli.icfg.rel_tol) << " abs_tol="
       << format_double(cli.icfg.abs_tol) << " event_tol="
       << format_double(cli.icfg.event_tol);
    return ss.str();
}

int cmd_simulate(const Cli& cli) {
    const double t_end = require(cli.t_end, "--t-end");
    if (!(t_end > cli.t0))
        throw UsageError("--t-end must exceed --t0");
    auto rng = rng_for(cli);

    PiecewiseVectorField field = [&] {
        if (cli.model == "reduced")
            return make_reduced_field(build_params(cli, true, false));
        if (cli.model == "nondim") {
            if (!cli.mu)
                throw UsageError("missing required flag --mu");
            return make_nondim_field(build_params(cli, false, true));
        }
        if (cli.model == "lin3") {
            if (!cli.a || !cli.b)
                throw UsageError("lin3 requires --a and --b");
            return make_lin3_field(build_params(cli, false, true));
        }
        if (cli.model == "stom2") {
            cli.dim.validate();
            return make_stom2_field(cli.dim);
        }
        if (cli.model == "stom4") {
            cli.dim.validate();
            return make_stom4_field(canonical_forcing(cli.dim), cli.dim);
        }
        if (cli.model == "forced") {
            ModelParams p;
            p.delta0 = cli.delta0.value_or(0.07);
            return make_forced_field(p, build_forcing(cli));
        }
        throw UsageError("unknown --model " + cli.model);
    }();

    std::vector<std::string> columns;
    std::vector<double> s0;
    if (cli.model == "reduced" || cli.model == "forced") {
        columns = {"y", "mu"};
        s0 = {uniform(rng, 0.1, 1.9), uniform(rng, 0.1, 1.9)};
    } else if (cli.model == "nondim") {
        columns = {"x", "y"};
        s0 = {uniform(rng, 0.5, 1.5), uniform(rng, 0.1, 1.9)};
    } else if (cli.model == "lin3") {
        columns = {"x", "y", "mu"};
        s0 = {uniform(rng, 0.5, 1.5), uniform(rng, 0.1, 1.9),
              uniform(rng, 0.1, 1.9)};
    } else if (cli.model == "stom2") {
        columns = {"T", "S"};
        s0 = {uniform(rng, 0.0, 1.5 * cli.dim.T_a),
              uniform(rng, 0.0, 1.5 * std::max(cli.dim.S_a, 0.1))};
    } else {
        columns = {"T_e", "T_p", "S_e", "S_p"};
        const BoxForcing bf = canonical_forcing(cli.dim);
        s0 = {uniform(rng, bf.T_p_a, bf.T_e_a), uniform(rng, bf.T_p_a, bf.T_e_a),
              uniform(rng, bf.S_p_a, bf.S_e_a), uniform(rng, bf.S_p_a, bf.S_e_a)};
    }

    IntegratorConfig icfg = cli.icfg;
    icfg.max_steps = cli.max_steps;
    const Trajectory traj = integrate(field, s0, cli.t0, t_end, icfg);

    std::string meta;
    nlohmann::json header;
    {
        std::ostringstream ss;
        ss << "model=" << cli.model << " seed=" << cli.seed;
        if (cli.model == "stom2" || cli.model == "stom4") {
            ss << " R_T=" << format_double(cli.dim.R_T) << " R_S="
               << format_double(cli.dim.R_S) << " alpha="
               << format_double(cli.dim.alpha) << " beta="
               << format_double(cli.dim.beta) << " psi0="
               << format_double(cli.dim.psi0) << " T_a="
               << format_double(cli.dim.T_a) << " S_a="
               << format_double(cli.dim.S_a) << " t0="
               << format_double(cli.t0) << " t_end=" << format_double(t_end);
            meta = ss.str();
        } else if (cli.model == "forced") {
            const ForcingSpec f = build_forcing(cli);
            ss << " delta0=" << format_double(cli.delta0.value_or(0.07))
               << " A_bar=" << format_double(f.A_bar) << " p="
               << format_double(f.p) << " lambda_bar="
               << format_double(f.lambda_bar) << " q=" << format_double(f.q)
               << " omega=" << format_double(f.omega) << " theta="
               << format_double(f.theta) << " t0=" << format_double(cli.t0)
               << " t_end=" << format_double(t_end);
            meta = ss.str();
        } else {
            Cli c = cli;
            c.t_end = t_end;
            meta = meta_params(c, build_params(c, cli.model == "reduced",
                                               cli.model != "reduced"));
        }
        header["meta"] = meta;
        header["model"] = cli.model;
        header["seed"] = cli.seed;
    }

    Output out(cli.out);
    if (cli.format == "csv")
        write_trajectory_csv(*out.os, traj, columns, meta);
    else if (cli.format == "json")
        *out.os << trajectory_to_json(traj, columns, header).dump(2) << "\n";
    else
        throw UsageError("unknown --format " + cli.format);
    return 0;
}

int cmd_classify(const Cli& cli) {
    ModelParams p;
    p.A = require(cli.A, "--A");
    p.lambda = require(cli.lambda, "--lambda");
    p.delta0 = require(cli.delta0, "--delta0");
    nlohmann::json j;
    j["equilibrium"] = to_json(equilibrium(p));
    j["regime"] = to_json(classify_regime(p));
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_sweep(const Cli& cli) {
    const double A = require(cli.A, "--A");
    const double delta0 = require(cli.delta0, "--delta0");
    const double lo = require(cli.lambda_min, "--lambda-min");
    const double hi = require(cli.lambda_max, "--lambda-max");
    const double step = require(cli.step, "--step");
    if (!(step > 0.0) || !(hi > lo))
        throw UsageError("sweep range must be increasing with positive --step");
    std::vector<double> grid;
    for (double x = lo; x <= hi + 0.5 * step; x += step)
        grid.push_back(std::min(x, hi));
    if (grid.size() >= 2 && grid[grid.size() - 1] == grid[grid.size() - 2])
        grid.pop_back();

    const BifurcationDiagram diagram =
        sweep_lambda(A, delta0, grid, cli.icfg, cli.jobs);
    std::ostringstream meta;
    meta << "A=" << format_double(A) << " delta0=" << format_double(delta0)
         << " jobs=" << cli.jobs;
    Output out(cli.out);
    write_sweep_csv(*out.os, diagram, meta.str());
    return 0;
}

int cmd_forced(const Cli& cli) {
    const double delta0 = cli.delta0.value_or(0.07);
    const double t_end = cli.t_end.value_or(1620.0);
    if (!(t_end > cli.t0))
        throw UsageError("--t-end must exceed --t0");
    const ForcingSpec f = build_forcing(cli);
    if (f.has_table()) {
        if (cli.t0 < f.table_tau.front() || t_end > f.table_tau.back())
            throw UsageError(
                "requested time span exceeds the tabulated A(tau) range");
    }
    auto rng = rng_for(cli);
    const std::array<double, 2> s0{uniform(rng, 0.1, 1.9),
                                   uniform(rng, 0.1, 1.9)};
    const ForcedRunResult run = forced_run(f, delta0, {cli.t0, t_end}, cli.icfg,
                                           cli.threshold, cli.min_gap, s0);
    std::ostringstream meta;
    meta << "seed=" << cli.seed << " delta0=" << format_double(delta0)
         << " A_bar=" << format_double(f.A_bar) << " p=" << format_double(f.p)
         << " lambda_bar=" << format_double(f.lambda_bar) << " q="
         << format_double(f.q) << " omega=" << format_double(f.omega)
         << " theta=" << format_double(f.theta);

    Output out(cli.out);
    write_forced_csv(*out.os, run, f, meta.str());
    const nlohmann::json stats = to_json(run.stats);
    if (!cli.out.empty()) {
        const std::string side = cli.out + ".stats.json";
        std::ofstream sf(side, std::ios::binary);
        if (!sf)
            throw UsageError("cannot open sidecar file: " + side);
        sf << stats.dump(2) << "\n";
    } else {
        std::cout << stats.dump(2) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    Cli cli;
    CLI::App app{"Piecewise-smooth fast/slow ocean-circulation model toolkit"};
    app.set_config("--config", "", "Key-value config file (flags override)");
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--A", cli.A, "Advective strength A");
        sub->add_option("--lambda", cli.lambda, "Slow-nullcline position");
        sub->add_option("--delta0", cli.delta0, "Slowest-scale parameter");
        sub->add_option("--epsilon", cli.epsilon, "Fast/slow ratio");
        sub->add_option("--mu", cli.mu, "Forcing ratio (2D models)");
        sub->add_option("--a", cli.a, "Temperature feedback coefficient");
        sub->add_option("--b", cli.b, "Salinity feedback coefficient");
        sub->add_option("--t0", cli.t0, "Start time");
        sub->add_option("--t-end", cli.t_end, "End time");
        sub->add_option("--rel-tol", cli.icfg.rel_tol, "Relative tolerance");
        sub->add_option("--abs-tol", cli.icfg.abs_tol, "Absolute tolerance");
        sub->add_option("--event-tol", cli.icfg.event_tol,
                        "Event time tolerance");
        sub->add_option("--max-steps", cli.max_steps, "Step budget");
        sub->add_option("--out", cli.out, "Output path (default stdout)");
        sub->add_option("--seed", cli.seed, "Seed for random initial state");
    };

    CLI::App* sim = app.add_subcommand("simulate", "Integrate one model run");
    add_common(sim);
    sim->add_option("--model", cli.model,
                    "stom4|stom2|nondim|lin3|reduced|forced")
        ->required();
    sim->add_option("--format", cli.format, "csv|json");
    sim->add_option("--R-T", cli.dim.R_T, "Thermal relaxation rate");
    sim->add_option("--R-S", cli.dim.R_S, "Haline relaxation rate");
    sim->add_option("--alpha", cli.dim.alpha, "Thermal expansion coefficient");
    sim->add_option("--beta", cli.dim.beta, "Haline contraction coefficient");
    sim->add_option("--psi0", cli.dim.psi0, "Circulation scale");
    sim->add_option("--T-a", cli.dim.T_a, "Atmospheric temperature gradient");
    sim->add_option("--S-a", cli.dim.S_a, "Atmospheric salinity gradient");
    sim->add_option("--T0", cli.dim.T0, "Reference temperature");
    sim->add_option("--S0", cli.dim.S0, "Reference salinity");
    sim->add_option("--A-bar", cli.A_bar, "Mean of A(tau) (forced model)");
    sim->add_option("--p", cli.p, "Amplitude of A(tau)");
    sim->add_option("--lambda-bar", cli.lambda_bar, "Mean of lambda(tau)");
    sim->add_option("--q", cli.q, "Amplitude of lambda(tau)");
    sim->add_option("--omega", cli.omega, "Forcing angular frequency");
    sim->add_option("--theta", cli.theta, "Forcing phase lag");
    sim->add_option("--obliquity-csv", cli.obliquity_csv,
                    "Tabulated obliquity series for A(tau)");
    sim->add_option("--tau-per-kyr", cli.tau_per_kyr,
                    "Model time units per kiloyear");

    CLI::App* cls =
        app.add_subcommand("classify", "Equilibrium and regime report");
    cls->add_option("--A", cli.A)->required();
    cls->add_option("--lambda", cli.lambda)->required();
    cls->add_option("--delta0", cli.delta0)->required();

    CLI::App* swp = app.add_subcommand("sweep", "Lambda sweep to CSV");
    add_common(swp);
    swp->add_option("--lambda-min", cli.lambda_min)->required();
    swp->add_option("--lambda-max", cli.lambda_max)->required();
    swp->add_option("--step", cli.step)->required();
    swp->add_option("--jobs", cli.jobs, "Parallel sweep workers");

    CLI::App* fcd = app.add_subcommand("forced", "Forced run with diagnostics");
    add_common(fcd);
    fcd->add_option("--A-bar", cli.A_bar, "Mean of A(tau)");
    fcd->add_option("--p", cli.p, "Amplitude of A(tau)");
    fcd->add_option("--lambda-bar", cli.lambda_bar, "Mean of lambda(tau)");
    fcd->add_option("--q", cli.q, "Amplitude of lambda(tau)");
    fcd->add_option("--omega", cli.omega, "Forcing angular frequency");
    fcd->add_option("--theta", cli.theta, "Forcing phase lag");
    fcd->add_option("--obliquity-csv", cli.obliquity_csv,
                    "Tabulated obliquity series for A(tau)");
    fcd->add_option("--tau-per-kyr", cli.tau_per_kyr,
                    "Model time units per kiloyear");
    fcd->add_option("--threshold", cli.threshold, "Excursion threshold");
    fcd->add_option("--min-gap", cli.min_gap, "Episode merge gap (tau units)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(cli);
        if (cls->parsed())
            return cmd_classify(cli);
        if (swp->parsed())
            return cmd_sweep(cli);
        if (fcd->parsed())
            return cmd_forced(cli);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DegenerateParamsError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IngestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
