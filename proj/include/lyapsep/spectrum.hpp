#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "lyapsep/dichotomy.hpp"
#include "lyapsep/envelope.hpp"
#include "lyapsep/errors.hpp"
#include "lyapsep/lyapunov.hpp"
#include "lyapsep/propagator.hpp"
#include "lyapsep/separation.hpp"
#include "lyapsep/system.hpp"

namespace lyapsep {

inline constexpr double kDefaultResolution = 0.1;

struct Interval {
    double lo = 0.0, hi = 0.0;
    bool contains(double x, double slack = 0.0) const { return x >= lo - slack && x <= hi + slack; }
};

struct SpectrumProbe {
    double gamma = 0.0;
    bool resolvent = false;
    std::size_t rank = 0;  // rank that produced the dichotomy, or rank_select's rank
    double alpha = 0.0, epsilon = 0.0;
};

struct SpectrumBoundary {
    double gamma = 0.0;
    double bracket_lo = 0.0, bracket_hi = 0.0;
    bool resolvent_below = false;
    /// Classification at gamma -/+ resolution.
    bool resolvent_minus = false, resolvent_plus = false;
};

struct SpectrumOptions {
    FitMode mode = FitMode::Relaxed;
    double resolution = kDefaultResolution;
    double intercept_cap = kDefaultInterceptCap;
    double alpha_min = kDefaultAlphaMin;
};

struct SpectrumResult {
    std::vector<Interval> intervals;
    double range_lo = 0.0, range_hi = 0.0;
    double resolution = kDefaultResolution;
    FitMode mode = FitMode::Relaxed;
    std::size_t dim = 0;
    GrowthBound growth;
    std::vector<SpectrumProbe> probes;
    std::vector<SpectrumBoundary> boundaries;
    bool full_spectrum = false;
};

inline bool full_spectrum_check(const SpectrumResult& r, std::size_t n) { return r.intervals.size() == n; }
inline bool full_spectrum_check(const std::vector<Interval>& intervals, std::size_t n) { return intervals.size() == n; }

/// Resolvent test at gamma: the rank from rank_select, then its two neighbours.
inline SpectrumProbe classify_shift(DichotomyData& data, double gamma, const SpectrumOptions& opts) {
    NedOptions ned;
    ned.mode = opts.mode;
    ned.intercept_cap = opts.intercept_cap;
    ned.alpha_min = opts.alpha_min;
    ned.envelope.rate_bound = false;
    const std::size_t k0 = rank_select(data.estimates(), gamma);
    SpectrumProbe p;
    p.gamma = gamma;
    p.rank = k0;
    std::vector<std::size_t> ranks{k0};
    if (k0 > 0) ranks.push_back(k0 - 1);
    if (k0 < data.dim()) ranks.push_back(k0 + 1);
    for (std::size_t k : ranks) {
        const DichotomyFit f = ned_fit(data, gamma, k, ned);
        if (k == k0 || f.verdict) {
            p.alpha = f.alpha;
            p.epsilon = f.epsilon;
            p.rank = k;
        }
        if (f.verdict) {
            p.resolvent = true;
            break;
        }
    }
    return p;
}

/// Scans [-(a+b)-1, (a+b)+1] from the growth bound at the given resolution (plus the exponent
/// estimates as extra probes), bisects each boundary to resolution/4 and merges spectral runs.
inline SpectrumResult scan(DichotomyData& data, const SpectrumOptions& opts = {}) {
    if (!(opts.resolution >= 2.0 * opts.alpha_min)) throw InvalidArgument("resolution must be at least 2 * alpha_min");
    SpectrumResult r;
    r.mode = opts.mode;
    r.resolution = opts.resolution;
    r.dim = data.dim();
    r.growth = growth_bound(data, opts.intercept_cap);
    const double R = r.growth.a_tilde + r.growth.b_tilde + 1.0;
    r.range_lo = -R;
    r.range_hi = R;

    std::vector<double> gammas;
    const auto count = static_cast<std::size_t>(std::ceil(2.0 * R / opts.resolution - 1e-9));
    for (std::size_t j = 0; j <= count; ++j) gammas.push_back(std::min(R, -R + static_cast<double>(j) * opts.resolution));
    for (double v : data.estimates())
        if (v > -R && v < R) gammas.push_back(v);
    std::sort(gammas.begin(), gammas.end());
    gammas.erase(std::unique(gammas.begin(), gammas.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                 gammas.end());

    for (double g : gammas) r.probes.push_back(classify_shift(data, g, opts));

    auto boundary = [&](std::size_t a) {
        double lo = r.probes[a].gamma, hi = r.probes[a + 1].gamma;
        const bool lo_res = r.probes[a].resolvent;
        while (hi - lo > opts.resolution / 4.0) {
            const double mid = 0.5 * (lo + hi);
            (classify_shift(data, mid, opts).resolvent == lo_res ? lo : hi) = mid;
        }
        SpectrumBoundary b;
        b.gamma = 0.5 * (lo + hi);
        b.bracket_lo = lo;
        b.bracket_hi = hi;
        b.resolvent_below = lo_res;
        b.resolvent_minus = classify_shift(data, b.gamma - opts.resolution, opts).resolvent;
        b.resolvent_plus = classify_shift(data, b.gamma + opts.resolution, opts).resolvent;
        r.boundaries.push_back(b);
        return b.gamma;
    };

    std::optional<double> start;
    for (std::size_t a = 0; a < r.probes.size(); ++a) {
        const bool spectral = !r.probes[a].resolvent;
        if (spectral && !start) start = a == 0 ? r.probes[0].gamma : boundary(a - 1);
        const bool run_ends = spectral && (a + 1 == r.probes.size() || r.probes[a + 1].resolvent);
        if (run_ends) {
            const double end = a + 1 == r.probes.size() ? r.probes[a].gamma : boundary(a);
            r.intervals.push_back({std::max(*start, r.range_lo), std::min(end, r.range_hi)});
            start.reset();
        }
    }
    r.full_spectrum = full_spectrum_check(r, r.dim);
    return r;
}

inline SpectrumResult scan(const Trajectory& tr, const PairGrid& grid, const SpectrumOptions& opts = {}) {
    DichotomyData data = DichotomyData::all(tr, grid);
    return scan(data, opts);
}

/// Scalar spectrum of every diagonal component.
inline std::vector<SpectrumResult> component_spectra(const Trajectory& tr, const PairGrid& grid,
                                                     const SpectrumOptions& opts = {}) {
    if (!tr.diagonal_flow()) throw InvalidArgument("component spectra require a diagonal system");
    const ExponentReport rep = exponents(tr);
    std::vector<SpectrumResult> out;
    for (std::size_t i = 0; i < tr.dim(); ++i) {
        DichotomyData data(tr, grid, {i}, {rep.values[i]});
        out.push_back(scan(data, opts));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Splitting

struct SplittingOptions {
    FitMode mode = FitMode::Relaxed;
    double a_min = kDefaultAMin;
    double intercept_cap = kDefaultInterceptCap;
    double alpha_min = kDefaultAlphaMin;
    double resolution = kDefaultResolution;
    double gap_tol = kDefaultGapTol;
    std::size_t max_pairs = kDefaultMaxPairs;
};

struct SplittingResult {
    std::size_t j = 0;
    double lambda = 0.0;
    /// lambda lies strictly between the j-th and (j+1)-th ascending exponent clusters.
    bool in_exponent_gap = false;
    std::vector<ExponentCluster> clusters;  // ascending
    std::optional<SystemCertificates> augmented;
    bool augmented_weakly_separated = false;
    DichotomyFit dichotomy;
    bool lambda_resolvent = false;
    SpectrumResult spectrum;
    /// The scanned spectrum has intervals on both sides of lambda and none containing it.
    bool split = false;
};

/// Inserts the constant lambda between exponent clusters j and j+1 (ascending, 1-based), checks
/// weak separation of the augmented system, the dichotomy at gamma = lambda, and whether the
/// scanned spectrum splits at lambda.
inline SplittingResult splitting_test(const Trajectory& tr, std::size_t j, double lambda, const SplittingOptions& opts = {}) {
    if (!tr.system().is_diagonal()) throw InvalidArgument("splitting_test requires a diagonal system");
    SplittingResult res;
    res.j = j;
    res.lambda = lambda;
    const ExponentReport rep = exponents(tr);
    res.clusters = distinct_exponents(rep, opts.gap_tol);
    std::reverse(res.clusters.begin(), res.clusters.end());
    if (j < 1 || j >= res.clusters.size())
        throw InvalidArgument("gap index j must lie in 1..(number of exponent clusters - 1)");
    res.in_exponent_gap = lambda > res.clusters[j - 1].value && lambda < res.clusters[j].value;

    // Augmented system in ascending order with lambda after the first j clusters.
    const std::vector<std::size_t> asc = rep.ascending();
    std::size_t insert_at = 0;
    for (std::size_t c = 0; c < j; ++c) insert_at += res.clusters[c].multiplicity;
    const System aug = insert_lambda(diagonal_subsystem(tr.system(), asc), insert_at, lambda);
    const Trajectory aug_tr = integrate(aug, tr.horizon(), tr.step(), tr.tol());
    const PairGrid aug_grid = pair_grid(aug_tr, opts.max_pairs);
    SeparationOptions sep;
    sep.a_min = opts.a_min;
    sep.intercept_cap = opts.intercept_cap;
    for (std::size_t i = 0; i < aug.dim(); ++i) sep.order.push_back(i);
    res.augmented = system_certificates(aug_tr, aug_grid, sep);
    res.augmented_weakly_separated = res.augmented->overall != Separation::NotSeparated;

    const PairGrid grid = pair_grid(tr, opts.max_pairs);
    DichotomyData data = DichotomyData::all(tr, grid);
    NedOptions ned;
    ned.mode = opts.mode;
    ned.intercept_cap = opts.intercept_cap;
    ned.alpha_min = opts.alpha_min;
    res.dichotomy = ned_fit(data, lambda, rank_select(data.estimates(), lambda), ned);
    res.lambda_resolvent = res.dichotomy.verdict;

    SpectrumOptions so;
    so.mode = opts.mode;
    so.resolution = opts.resolution;
    so.intercept_cap = opts.intercept_cap;
    so.alpha_min = opts.alpha_min;
    res.spectrum = scan(data, so);
    bool below = false, above = false, inside = false;
    for (const auto& iv : res.spectrum.intervals) {
        if (iv.contains(lambda)) inside = true;
        if (iv.hi < lambda) below = true;
        if (iv.lo > lambda) above = true;
    }
    res.split = below && above && !inside;
    return res;
}

}  // namespace lyapsep
