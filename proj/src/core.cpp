#include "ocirc/core.hpp"

#include <algorithm>
#include <cmath>

namespace ocirc {

void ModelParams::validate() const {
    if (!(A > 0.0))
        throw DegenerateParamsError("ModelParams: A must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw DegenerateParamsError("ModelParams: epsilon must be in (0, 1)");
    if (!(delta0 > 0.0))
        throw DegenerateParamsError("ModelParams: delta0 must be positive");
    if (!(a > 0.0))
        throw DegenerateParamsError("ModelParams: a must be positive");
    if (!(b > 0.0))
        throw DegenerateParamsError("ModelParams: b must be positive");
}

void ModelParams::sync_delta_from_delta0() {
    if (!(b > 0.0))
        throw DegenerateParamsError("sync_delta_from_delta0: b must be > 0");
    delta = delta0 / b;
}

void ModelParams::sync_a_from_lambda() {
    if (!(b > 0.0))
        throw DegenerateParamsError("sync_a_from_lambda: b must be > 0");
    a = lambda * b - 1.0;
}

void DimensionalParams::validate() const {
    if (!(R_T > R_S && R_S > 0.0))
        throw DegenerateParamsError(
            "DimensionalParams: need R_T > R_S > 0");
    if (!(alpha > 0.0 && beta > 0.0 && psi0 > 0.0 && T_a > 0.0))
        throw DegenerateParamsError(
            "DimensionalParams: alpha, beta, psi0, T_a must be positive");
}

void ForcingSpec::validate() const {
    if (!(p >= 0.0 && q >= 0.0))
        throw DegenerateParamsError("ForcingSpec: p, q must be nonnegative");
    if (!(omega > 0.0))
        throw DegenerateParamsError("ForcingSpec: omega must be positive");
    if (table_tau.size() != table_A.size())
        throw DegenerateParamsError("ForcingSpec: table columns differ in length");
    for (std::size_t i = 1; i < table_tau.size(); ++i)
        if (!(table_tau[i] > table_tau[i - 1]))
            throw DegenerateParamsError(
                "ForcingSpec: table must be strictly increasing in tau");
}

void Trajectory::check_invariants() const {
    if (times.empty())
        throw std::logic_error("Trajectory: empty");
    if (states.size() != times.size() * static_cast<std::size_t>(dim))
        throw std::logic_error("Trajectory: states misaligned with times");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::logic_error("Trajectory: times not strictly increasing");
    if (!seg_t0.empty()) {
        if (seg_t0.size() != times.size() - 1 || seg_h.size() != seg_t0.size() ||
            seg_cont.size() != seg_t0.size() * 5 * static_cast<std::size_t>(dim))
            throw std::logic_error("Trajectory: dense segments misaligned");
    }
    for (const auto& ev : events) {
        if (ev.time < times.front() || ev.time > times.back())
            throw std::logic_error("Trajectory: event time outside range");
        if (!std::binary_search(times.begin(), times.end(), ev.time))
            throw std::logic_error("Trajectory: event time is not a sample time");
    }
}

PiecewiseVectorField::PiecewiseVectorField(int dim,
                                           std::vector<SwitchFn> switches,
                                           std::vector<Region> regions,
                                           bool time_dependent)
    : dim_(dim), switches_(std::move(switches)), regions_(std::move(regions)),
      time_dependent_(time_dependent) {
    if (dim_ <= 0)
        throw std::invalid_argument("PiecewiseVectorField: dim must be positive");
    if (regions_.empty())
        throw std::invalid_argument("PiecewiseVectorField: no regions");
    if (switches_.size() > 31)
        throw std::invalid_argument("PiecewiseVectorField: too many switching functions");
}

void PiecewiseVectorField::check_dim(std::span<const double> s) const {
    if (s.size() != static_cast<std::size_t>(dim_))
        throw DimensionMismatchError(
            "state has length " + std::to_string(s.size()) + ", field dim is " +
            std::to_string(dim_));
}

double PiecewiseVectorField::switch_value(std::size_t i,
                                          std::span<const double> s) const {
    check_dim(s);
    return switches_.at(i)(s);
}

std::uint32_t PiecewiseVectorField::region_pattern(
    std::span<const double> s) const {
    check_dim(s);
    std::uint32_t pattern = 0;
    for (std::size_t i = 0; i < switches_.size(); ++i)
        if (switches_[i](s) >= 0.0) // zero counts as the ">=" side
            pattern |= (1u << i);
    return pattern;
}

const Region& PiecewiseVectorField::region_of(std::span<const double> s) const {
    const std::uint32_t pattern = region_pattern(s);
    for (const auto& r : regions_)
        if (r.pattern == pattern)
            return r;
    throw std::logic_error("PiecewiseVectorField: no region for sign pattern " +
                           std::to_string(pattern));
}

void PiecewiseVectorField::evaluate(double t, std::span<const double> s,
                                    std::span<double> ds) const {
    if (ds.size() != static_cast<std::size_t>(dim_))
        throw DimensionMismatchError("output has wrong length");
    region_of(s).rhs(t, s, ds);
}

std::vector<double> PiecewiseVectorField::evaluate(
    double t, std::span<const double> s) const {
    std::vector<double> ds(static_cast<std::size_t>(dim_));
    evaluate(t, s, ds);
    return ds;
}

} // namespace ocirc
