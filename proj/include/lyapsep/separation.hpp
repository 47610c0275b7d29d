#pragma once

// Integral-separation certificates between adjacent components, ordered by ascending
// exponent estimate. Pair i compares component order[i-1] (lower) with order[i] (upper):
//
//     g(s, t) = [L_upper(t) - L_upper(s)] - [L_lower(t) - L_lower(s)] >= a (t - s) - b s + D

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "lyapsep/envelope.hpp"
#include "lyapsep/errors.hpp"
#include "lyapsep/lyapunov.hpp"
#include "lyapsep/propagator.hpp"

namespace lyapsep {

inline constexpr double kDefaultAMin = 0.05;

enum class Separation { NotSeparated = 0, WeaklyIntegrallySeparated = 1, IntegrallySeparated = 2 };
enum class CertificateForm { Coefficient, Column };

inline const char* to_string(Separation s) {
    switch (s) {
        case Separation::IntegrallySeparated: return "IntegrallySeparated";
        case Separation::WeaklyIntegrallySeparated: return "WeaklyIntegrallySeparated";
        default: return "NotSeparated";
    }
}
inline const char* to_string(CertificateForm f) { return f == CertificateForm::Coefficient ? "coefficient" : "column"; }

struct SeparationOptions {
    double a_min = kDefaultAMin;
    double intercept_cap = kDefaultInterceptCap;
    /// Component indices in ascending exponent order; empty means "estimate from the trajectory".
    std::vector<std::size_t> order;
    EnvelopeOptions envelope;
};

struct SeparationCertificate {
    std::size_t pair = 0;  // 1-based, between order[pair-1] and order[pair]
    std::size_t lower = 0, upper = 0;
    CertificateForm form = CertificateForm::Column;
    EnvelopeFit fit;          // free b >= 0
    EnvelopeFit uniform_fit;  // b pinned to 0
    Separation classification = Separation::NotSeparated;
    double a_min = kDefaultAMin;

    /// The fit that justifies the classification (uniform when integrally separated).
    const EnvelopeFit& certificate() const {
        return classification == Separation::IntegrallySeparated ? uniform_fit : fit;
    }
};

struct SystemCertificates {
    std::vector<std::size_t> order;
    std::vector<SeparationCertificate> pairs;
    Separation overall = Separation::IntegrallySeparated;
};

/// Ascending component order from exponent estimates (identity on short horizons).
inline std::vector<std::size_t> ascending_order(const Trajectory& tr) {
    if (tr.horizon() >= kMinExponentHorizon) return exponents(tr).ascending();
    std::vector<std::size_t> idx(tr.dim());
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

/// g(s, t) samples for components (lower, upper) on the pair grid.
inline std::vector<EnvelopeSample> separation_samples(const Trajectory& tr, const PairGrid& grid, std::size_t lower,
                                                      std::size_t upper) {
    if (grid.steps != tr.steps()) throw InvalidArgument("pair grid does not match the trajectory grid");
    std::vector<EnvelopeSample> out;
    out.reserve(grid.size());
    for (const auto& [m, k] : grid.pairs) {
        const double g = (tr.lognorm(k, upper) - tr.lognorm(m, upper)) - (tr.lognorm(k, lower) - tr.lognorm(m, lower));
        out.push_back({tr.time(m), tr.time(k), g});
    }
    return out;
}

namespace detail {

inline SeparationCertificate certify(const Trajectory& tr, std::size_t i, const PairGrid& grid,
                                     const SeparationOptions& opts, CertificateForm form) {
    const std::vector<std::size_t> order = opts.order.empty() ? ascending_order(tr) : opts.order;
    if (order.size() != tr.dim()) throw InvalidArgument("component order has the wrong length");
    if (i < 1 || i >= tr.dim()) throw InvalidArgument("pair index must lie in 1..n-1");
    SeparationCertificate c;
    c.pair = i;
    c.lower = order[i - 1];
    c.upper = order[i];
    c.form = form;
    c.a_min = opts.a_min;
    const auto samples = separation_samples(tr, grid, c.lower, c.upper);
    c.fit = fit_lower(samples, opts.intercept_cap, opts.envelope);
    EnvelopeOptions uni = opts.envelope;
    uni.zero_anchor_slope = true;
    c.uniform_fit = fit_lower(samples, opts.intercept_cap, uni);
    if (c.uniform_fit.feasible && c.uniform_fit.slope_gap >= opts.a_min)
        c.classification = Separation::IntegrallySeparated;
    else if (c.fit.feasible && c.fit.slope_gap >= opts.a_min)
        c.classification = Separation::WeaklyIntegrallySeparated;
    return c;
}

}  // namespace detail

/// Certificate from the integrated diagonal coefficients a_lower, a_upper.
inline SeparationCertificate coefficient_certificate(const Trajectory& tr, std::size_t i, const PairGrid& grid,
                                                     const SeparationOptions& opts = {}) {
    if (!tr.diagonal_flow()) throw InvalidArgument("coefficient certificates require a diagonal system");
    return detail::certify(tr, i, grid, opts, CertificateForm::Coefficient);
}

/// Certificate from fundamental-matrix column norms.
inline SeparationCertificate column_certificate(const Trajectory& tr, std::size_t i, const PairGrid& grid,
                                                const SeparationOptions& opts = {}) {
    return detail::certify(tr, i, grid, opts, CertificateForm::Column);
}

/// All adjacent pairs; the overall class is the weakest pair class (vacuously integral for n = 1).
inline SystemCertificates system_certificates(const Trajectory& tr, const PairGrid& grid,
                                              const SeparationOptions& opts = {}) {
    SystemCertificates out;
    SeparationOptions o = opts;
    if (o.order.empty()) o.order = ascending_order(tr);
    out.order = o.order;
    const CertificateForm form = tr.diagonal_flow() ? CertificateForm::Coefficient : CertificateForm::Column;
    for (std::size_t i = 1; i < tr.dim(); ++i) {
        out.pairs.push_back(detail::certify(tr, i, grid, o, form));
        out.overall = std::min(out.overall, out.pairs.back().classification);
    }
    return out;
}

}  // namespace lyapsep
