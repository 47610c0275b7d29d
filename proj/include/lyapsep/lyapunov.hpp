#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <utility>
#include <vector>

#include "lyapsep/errors.hpp"
#include "lyapsep/propagator.hpp"

namespace lyapsep {

inline constexpr double kDefaultTailFraction = 0.2;
inline constexpr double kDefaultGapTol = 0.1;
inline constexpr double kRegularDefectTol = 0.05;
inline constexpr double kMinExponentHorizon = 100.0;

struct ExponentCluster {
    double value = 0.0;
    std::size_t multiplicity = 0;
};

/// Max of L_i(t)/t over one dyadic window [T/2^(j+1), T/2^j].
struct TailWindow {
    double t_begin = 0.0, t_end = 0.0;
    std::vector<double> running_max;
};

struct ExponentReport {
    std::vector<double> values;           // per column, in system order
    double tail_fraction = kDefaultTailFraction;
    std::vector<TailWindow> windows;      // newest window first
    bool converged = false;

    /// Column indices sorted by descending estimate.
    std::vector<std::size_t> descending() const {
        std::vector<std::size_t> idx(values.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
        return idx;
    }
    /// Column indices sorted by ascending estimate (ties keep system order).
    std::vector<std::size_t> ascending() const {
        std::vector<std::size_t> idx(values.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        return idx;
    }
    std::vector<double> sorted_descending() const {
        std::vector<double> v = values;
        std::sort(v.begin(), v.end(), std::greater<>());
        return v;
    }
};

namespace detail {

inline double tail_max(const Trajectory& tr, std::size_t i, double t_from, double t_to) {
    double best = -std::numeric_limits<double>::infinity();
    const std::size_t k0 = static_cast<std::size_t>(std::max(1.0, std::ceil(t_from / tr.step() - 1e-9)));
    for (std::size_t k = k0; k <= tr.steps() && tr.time(k) <= t_to * (1.0 + 1e-12); ++k)
        best = std::max(best, tr.lognorm(k, i) / tr.time(k));
    return best;
}

}  // namespace detail

/// Limsup estimator: max of L_i(t_k)/t_k over the last `tail_fraction` of the grid.
inline ExponentReport exponents(const Trajectory& tr, double tail_fraction = kDefaultTailFraction) {
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) throw InvalidArgument("tail_fraction must lie in (0, 1)");
    if (tr.horizon() < kMinExponentHorizon) throw InvalidArgument("exponent estimates need T >= 100");
    ExponentReport rep;
    rep.tail_fraction = tail_fraction;
    const double T = tr.horizon();
    for (std::size_t i = 0; i < tr.dim(); ++i) rep.values.push_back(detail::tail_max(tr, i, (1.0 - tail_fraction) * T, T));

    for (double hi = T; hi / 2.0 >= 1.0 && rep.windows.size() < 8; hi /= 2.0) {
        TailWindow w{hi / 2.0, hi, {}};
        for (std::size_t i = 0; i < tr.dim(); ++i) w.running_max.push_back(detail::tail_max(tr, i, w.t_begin, w.t_end));
        rep.windows.push_back(std::move(w));
    }
    rep.converged = rep.windows.size() >= 2;
    if (rep.converged) {
        for (std::size_t i = 0; i < tr.dim(); ++i) {
            const double m0 = rep.windows[0].running_max[i], m1 = rep.windows[1].running_max[i];
            if (std::abs(m0 - m1) > 0.05 * std::max(1.0, std::abs(m0))) rep.converged = false;
        }
    }
    return rep;
}

/// Groups values (descending) so that every member lies within gap_tol of its cluster's top value.
inline std::vector<ExponentCluster> distinct_exponents(std::vector<double> values, double gap_tol = kDefaultGapTol) {
    if (!(gap_tol > 0.0)) throw InvalidArgument("gap_tol must be positive");
    std::sort(values.begin(), values.end(), std::greater<>());
    std::vector<ExponentCluster> out;
    double top = 0.0, sum = 0.0;
    std::size_t count = 0;
    for (double v : values) {
        if (count > 0 && top - v > gap_tol) {
            out.push_back({sum / static_cast<double>(count), count});
            count = 0;
            sum = 0.0;
        }
        if (count == 0) top = v;
        sum += v;
        ++count;
    }
    if (count > 0) out.push_back({sum / static_cast<double>(count), count});
    return out;
}

inline std::vector<ExponentCluster> distinct_exponents(const ExponentReport& rep, double gap_tol = kDefaultGapTol) {
    return distinct_exponents(rep.values, gap_tol);
}

/// Sum of exponent estimates minus the tail minimum of (1/t) * integral of the trace.
inline double regularity_defect(const Trajectory& tr, double tail_fraction = kDefaultTailFraction) {
    if (!tr.system().is_diagonal()) throw InvalidArgument("regularity_defect requires a diagonal system");
    const ExponentReport rep = exponents(tr, tail_fraction);
    const double sum = std::accumulate(rep.values.begin(), rep.values.end(), 0.0);
    double low = std::numeric_limits<double>::infinity();
    const double t_from = (1.0 - tail_fraction) * tr.horizon();
    const std::size_t k0 = static_cast<std::size_t>(std::max(1.0, std::ceil(t_from / tr.step() - 1e-9)));
    for (std::size_t k = k0; k <= tr.steps(); ++k) {
        double tr_int = 0.0;
        for (std::size_t i = 0; i < tr.dim(); ++i) tr_int += tr.lognorm(k, i);
        low = std::min(low, tr_int / tr.time(k));
    }
    return sum - low;
}

/// Writes "t,r1,...,rn" rows with r_i = L_i(t)/t (t > 0 only).
inline void write_rate_csv(const Trajectory& tr, std::ostream& os, std::size_t stride = 1) {
    stride = std::max<std::size_t>(stride, 1);
    os << "t";
    for (std::size_t i = 0; i < tr.dim(); ++i) os << ",r" << (i + 1);
    os << '\n' << std::setprecision(17);
    for (std::size_t k = 1; k <= tr.steps(); ++k) {
        if (k % stride != 0 && k != tr.steps()) continue;
        os << tr.time(k);
        for (std::size_t i = 0; i < tr.dim(); ++i) os << ',' << tr.lognorm(k, i) / tr.time(k);
        os << '\n';
    }
}

}  // namespace lyapsep
