#pragma once

// Affine envelopes c0 + c1*gap + c2*anchor over sampled pairs (s, t), where gap = |t - s| and
// anchor = min(s, t). Every fit is a three-variable LP with constraints
//
//     value_i <= c0 + c1 * gap_i + c2 * anchor_i
//
// inside a box, solved lexicographically for a list of objectives. Two exact solvers share the
// problem type: a simplex walk over vertices (large sample sets) and exhaustive enumeration of
// constraint triples (small sample sets, and as an independent check in tests).
//
// Because gap, anchor >= 0 and the value sits on the left, raising any coefficient keeps a
// point feasible, so the box corner (hi, hi, hi) is feasible iff the LP is.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "lyapsep/errors.hpp"

namespace lyapsep {

inline constexpr double kDefaultInterceptCap = 10.0;
inline constexpr double kSlopeLimit = 1e4;
inline constexpr std::size_t kEnumerationLimit = 64;

namespace lp {

using Vec3 = std::array<double, 3>;
inline constexpr std::size_t kNoSample = std::numeric_limits<std::size_t>::max();

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

/// a . c >= b
struct Row {
    Vec3 a;
    double b;
    std::size_t sample = kNoSample;
};

struct Problem {
    std::vector<Row> rows;  // the six bound rows come first
    std::vector<Vec3> objectives;
};

enum class Method { Auto, Simplex, Enumerate };

struct Solution {
    bool feasible = false;
    Vec3 c{0.0, 0.0, 0.0};
    std::array<std::size_t, 3> basis{0, 0, 0};
    std::vector<double> stage_values;
    std::size_t pivots = 0;
};

inline Problem make_problem(const Vec3& lo, const Vec3& hi) {
    Problem p;
    for (std::size_t k = 0; k < 3; ++k) {
        Vec3 e{0.0, 0.0, 0.0};
        e[k] = 1.0;
        p.rows.push_back({e, lo[k]});
        e[k] = -1.0;
        p.rows.push_back({e, -hi[k]});
    }
    return p;
}

inline double feas_tol(double b) { return 1e-9 * (1.0 + std::abs(b)); }

inline Eigen::Matrix3d basis_matrix(const Problem& p, const std::array<std::size_t, 3>& basis) {
    Eigen::Matrix3d B;
    for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 3; ++k) B(r, k) = p.rows[basis[static_cast<std::size_t>(r)]].a[static_cast<std::size_t>(k)];
    return B;
}

inline Vec3 vertex(const Problem& p, const std::array<std::size_t, 3>& basis) {
    const Eigen::Matrix3d B = basis_matrix(p, basis);
    const Eigen::Vector3d rhs(p.rows[basis[0]].b, p.rows[basis[1]].b, p.rows[basis[2]].b);
    const Eigen::Vector3d c = B.fullPivLu().solve(rhs);
    return {c[0], c[1], c[2]};
}

inline void finish(const Problem& p, Solution& s) {
    s.stage_values.clear();
    for (const auto& w : p.objectives) s.stage_values.push_back(dot(w, s.c));
}

/// Lexicographic simplex walk started from the upper box corner. Bland's rule on row indices.
/// After each stage, basis rows with positive multipliers are locked, which pins the walk to
/// the optimal face of that stage.
inline Solution simplex(const Problem& p) {
    Solution sol;
    const std::size_t m = p.rows.size();
    sol.basis = {1, 3, 5};
    sol.c = vertex(p, sol.basis);
    for (std::size_t i = 6; i < m; ++i)
        if (dot(p.rows[i].a, sol.c) - p.rows[i].b < -feas_tol(p.rows[i].b)) return sol;
    sol.feasible = true;

    std::array<bool, 3> locked{false, false, false};
    const std::size_t max_pivots = 50 * m + 1000;
    for (const auto& w : p.objectives) {
        const double eps_mu = 1e-11 * (1.0 + std::abs(w[0]) + std::abs(w[1]) + std::abs(w[2]));
        while (true) {
            const Eigen::Matrix3d B = basis_matrix(p, sol.basis);
            const auto lu = B.fullPivLu();
            const Eigen::Vector3d mu = B.transpose().fullPivLu().solve(Eigen::Vector3d(w[0], w[1], w[2]));

            int leave = -1;
            for (int j = 0; j < 3; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                if (locked[ju] || !(mu[j] < -eps_mu)) continue;
                if (leave < 0 || sol.basis[ju] < sol.basis[static_cast<std::size_t>(leave)]) leave = j;
            }
            if (leave < 0) {
                for (int j = 0; j < 3; ++j)
                    if (mu[j] > eps_mu) locked[static_cast<std::size_t>(j)] = true;
                break;
            }
            if (++sol.pivots > max_pivots) throw NumericalError("envelope LP exceeded its pivot budget");

            Eigen::Vector3d e = Eigen::Vector3d::Zero();
            e[leave] = 1.0;
            const Eigen::Vector3d dv = lu.solve(e);
            const Vec3 d{dv[0], dv[1], dv[2]};
            const double dn = dv.norm();

            std::size_t enter = m;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m; ++i) {
                if (i == sol.basis[0] || i == sol.basis[1] || i == sol.basis[2]) continue;
                const Row& r = p.rows[i];
                const double ad = dot(r.a, d);
                const double an = std::sqrt(dot(r.a, r.a));
                if (!(ad < -1e-12 * an * dn)) continue;
                const double slack = std::max(0.0, dot(r.a, sol.c) - r.b);
                const double theta = slack / -ad;
                if (theta < best * (1.0 - 1e-12) - 1e-300) {
                    best = theta;
                    enter = i;
                }
            }
            if (enter == m) throw NumericalError("envelope LP is unbounded");
            sol.basis[static_cast<std::size_t>(leave)] = enter;
            sol.c = vertex(p, sol.basis);
        }
    }
    finish(p, sol);
    return sol;
}

/// Exhaustive enumeration of constraint-triple vertices, lexicographically compared.
inline Solution enumerate(const Problem& p) {
    Solution best;
    const std::size_t m = p.rows.size();
    std::vector<double> vals(p.objectives.size());
    std::vector<double> best_vals;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            for (std::size_t k = j + 1; k < m; ++k) {
                const std::array<std::size_t, 3> basis{i, j, k};
                const Eigen::Matrix3d B = basis_matrix(p, basis);
                const double scale = B.cwiseAbs().maxCoeff();
                if (std::abs(B.determinant()) <= 1e-12 * scale * scale * scale) continue;
                const Vec3 c = vertex(p, basis);
                bool ok = true;
                for (std::size_t r = 0; r < m && ok; ++r)
                    ok = dot(p.rows[r].a, c) - p.rows[r].b >= -feas_tol(p.rows[r].b);
                if (!ok) continue;
                for (std::size_t o = 0; o < vals.size(); ++o) vals[o] = dot(p.objectives[o], c);
                bool better = !best.feasible;
                for (std::size_t o = 0; o < vals.size() && !better; ++o) {
                    const double tol = 1e-9 * (1.0 + std::abs(best_vals[o]));
                    if (vals[o] < best_vals[o] - tol) better = true;
                    else if (vals[o] > best_vals[o] + tol) break;
                }
                if (better) {
                    best.feasible = true;
                    best.c = c;
                    best.basis = basis;
                    best_vals = vals;
                }
            }
    if (best.feasible) finish(p, best);
    return best;
}

inline Solution solve(const Problem& p, Method method = Method::Auto) {
    if (method == Method::Auto) method = p.rows.size() <= 6 + kEnumerationLimit ? Method::Enumerate : Method::Simplex;
    return method == Method::Enumerate ? enumerate(p) : simplex(p);
}

}  // namespace lp

// ---------------------------------------------------------------------------
// Fits

struct EnvelopeSample {
    double s = 0.0, t = 0.0, value = 0.0;
    double gap() const noexcept { return std::abs(t - s); }
    double anchor() const noexcept { return std::min(s, t); }
};

enum class EnvelopeKind { Lower, Upper, Growth };
enum class FitMode { Strict, Relaxed };

inline const char* to_string(FitMode m) { return m == FitMode::Strict ? "strict" : "relaxed"; }
inline const char* to_string(EnvelopeKind k) {
    return k == EnvelopeKind::Lower ? "lower" : k == EnvelopeKind::Upper ? "upper" : "growth";
}

/// Constants in the sign convention of the fitted inequality:
///   Lower:  value >= slope_gap*(t-s) - nonuniform_slope*s + intercept
///   Upper:  value <= intercept - slope_gap*|t-s| + nonuniform_slope*min(s,t)
///   Growth: value <= intercept + slope_gap*|t-s| + nonuniform_slope*min(s,t)
struct EnvelopeFit {
    EnvelopeKind kind = EnvelopeKind::Lower;
    FitMode mode = FitMode::Relaxed;
    double slope_gap = 0.0;
    double nonuniform_slope = 0.0;
    double intercept = 0.0;
    bool feasible = false;
    double intercept_cap = kDefaultInterceptCap;
    /// Gap at which the support line is minimized (the first objective).
    double reference_gap = 0.0;
    /// Best rate any feasible intercept admits: max a, max alpha, or min a-tilde.
    double rate_bound = 0.0;
    bool rate_bound_feasible = false;
    std::vector<EnvelopeSample> active_pairs;
    std::size_t sample_count = 0;
};

struct EnvelopeOptions {
    /// Gap where the envelope height is minimized first; 0 picks a quarter of the largest gap.
    double reference_gap = 0.0;
    /// Pins the anchor coefficient to zero (uniform envelopes).
    bool zero_anchor_slope = false;
    /// Also solve the single-objective LP for rate_bound.
    bool rate_bound = true;
    lp::Method method = lp::Method::Auto;
};

namespace detail {

inline double reference_gap(const std::vector<EnvelopeSample>& samples, const EnvelopeOptions& opts) {
    if (samples.size() < 3) throw InvalidArgument("envelope fits need at least 3 samples");
    double max_gap = 0.0;
    for (const auto& smp : samples) {
        if (!std::isfinite(smp.value) || !std::isfinite(smp.s) || !std::isfinite(smp.t))
            throw InvalidArgument("envelope samples must be finite");
        max_gap = std::max(max_gap, smp.gap());
    }
    if (!(max_gap > 0.0)) throw InvalidArgument("degenerate sample set: every pair has t == s");
    return opts.reference_gap > 0.0 ? opts.reference_gap : max_gap / 4.0;
}

/// Fills the LP in the common form; `flip` negates values (lower envelopes).
inline lp::Problem build(const std::vector<EnvelopeSample>& samples, const lp::Vec3& lo, const lp::Vec3& hi, bool flip) {
    lp::Problem p = lp::make_problem(lo, hi);
    p.rows.reserve(6 + samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& smp = samples[i];
        p.rows.push_back({{1.0, smp.gap(), smp.anchor()}, flip ? -smp.value : smp.value, i});
    }
    return p;
}

inline std::vector<EnvelopeSample> active(const lp::Problem& p, const lp::Solution& sol,
                                          const std::vector<EnvelopeSample>& samples) {
    std::vector<EnvelopeSample> out;
    if (!sol.feasible) return out;
    std::array<std::size_t, 3> rows = sol.basis;
    std::sort(rows.begin(), rows.end());
    for (std::size_t r : rows)
        if (p.rows[r].sample != lp::kNoSample) out.push_back(samples[p.rows[r].sample]);
    return out;
}

}  // namespace detail

/// Lower envelope value >= a(t-s) - b s + D with a in [0, L], b >= 0, |D| <= cap.
/// Objectives: maximize a + D/U (the envelope height at gap U), then minimize b, then maximize D.
inline EnvelopeFit fit_lower(const std::vector<EnvelopeSample>& samples, double intercept_cap = kDefaultInterceptCap,
                             const EnvelopeOptions& opts = {}) {
    if (!(intercept_cap > 0.0)) throw InvalidArgument("intercept cap must be positive");
    for (const auto& smp : samples)
        if (smp.s > smp.t) throw InvalidArgument("lower envelopes need s <= t");
    const double U = detail::reference_gap(samples, opts);
    const double b_hi = opts.zero_anchor_slope ? 0.0 : kSlopeLimit;
    lp::Problem p = detail::build(samples, {-intercept_cap, -kSlopeLimit, 0.0}, {intercept_cap, 0.0, b_hi}, true);

    EnvelopeFit fit;
    fit.kind = EnvelopeKind::Lower;
    fit.intercept_cap = intercept_cap;
    fit.reference_gap = U;
    fit.sample_count = samples.size();

    p.objectives = {{1.0 / U, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}};
    const lp::Solution sol = lp::solve(p, opts.method);
    fit.feasible = sol.feasible;
    if (sol.feasible) {
        fit.intercept = -sol.c[0];
        fit.slope_gap = -sol.c[1];
        fit.nonuniform_slope = sol.c[2];
        fit.active_pairs = detail::active(p, sol, samples);
        if (!opts.rate_bound) return fit;
        p.objectives = {{0.0, 1.0, 0.0}};
        const lp::Solution rb = lp::solve(p, opts.method);
        fit.rate_bound_feasible = rb.feasible;
        fit.rate_bound = -rb.c[1];
    }
    return fit;
}

/// Upper envelope value <= log M - alpha|t-s| + eps min(s,t) with alpha in [0, L], eps >= 0, |log M| <= cap.
/// Relaxed: minimize the height at gap U, then eps, then log M.
/// Strict: minimize the height at gap U plus eps (maximizing alpha - eps), then maximize alpha, then
/// minimize log M; the fit is infeasible unless alpha > eps at the optimum.
inline EnvelopeFit fit_upper(const std::vector<EnvelopeSample>& samples, double intercept_cap = kDefaultInterceptCap,
                             FitMode mode = FitMode::Relaxed, const EnvelopeOptions& opts = {}) {
    if (!(intercept_cap > 0.0)) throw InvalidArgument("intercept cap must be positive");
    const double U = detail::reference_gap(samples, opts);
    const double e_hi = opts.zero_anchor_slope ? 0.0 : kSlopeLimit;
    lp::Problem p = detail::build(samples, {-intercept_cap, -kSlopeLimit, 0.0}, {intercept_cap, 0.0, e_hi}, false);

    EnvelopeFit fit;
    fit.kind = EnvelopeKind::Upper;
    fit.mode = mode;
    fit.intercept_cap = intercept_cap;
    fit.reference_gap = U;
    fit.sample_count = samples.size();

    if (mode == FitMode::Relaxed)
        p.objectives = {{1.0 / U, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}};
    else
        p.objectives = {{1.0 / U, 1.0, 1.0}, {0.0, 1.0, 0.0}, {1.0, 0.0, 0.0}};
    const lp::Solution sol = lp::solve(p, opts.method);
    fit.feasible = sol.feasible;
    if (sol.feasible) {
        fit.intercept = sol.c[0];
        fit.slope_gap = -sol.c[1];
        fit.nonuniform_slope = sol.c[2];
        fit.active_pairs = detail::active(p, sol, samples);
        if (mode == FitMode::Strict && !(fit.slope_gap - fit.nonuniform_slope > 1e-9)) fit.feasible = false;
        if (!opts.rate_bound) return fit;
        p.objectives = {{0.0, 1.0, 0.0}};
        const lp::Solution rb = lp::solve(p, opts.method);
        fit.rate_bound_feasible = rb.feasible;
        fit.rate_bound = -rb.c[1];
    }
    return fit;
}

/// Growth envelope value <= log K + a|t-s| + b min(s,t) with a, b in [0, L], |log K| <= cap.
/// Minimizes the height at gap U, then b, then log K.
inline EnvelopeFit fit_growth(const std::vector<EnvelopeSample>& samples, double intercept_cap = kDefaultInterceptCap,
                              const EnvelopeOptions& opts = {}) {
    if (!(intercept_cap > 0.0)) throw InvalidArgument("intercept cap must be positive");
    const double U = detail::reference_gap(samples, opts);
    const double b_hi = opts.zero_anchor_slope ? 0.0 : kSlopeLimit;
    lp::Problem p = detail::build(samples, {-intercept_cap, 0.0, 0.0}, {intercept_cap, kSlopeLimit, b_hi}, false);

    EnvelopeFit fit;
    fit.kind = EnvelopeKind::Growth;
    fit.intercept_cap = intercept_cap;
    fit.reference_gap = U;
    fit.sample_count = samples.size();

    p.objectives = {{1.0 / U, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}};
    const lp::Solution sol = lp::solve(p, opts.method);
    fit.feasible = sol.feasible;
    if (sol.feasible) {
        fit.intercept = sol.c[0];
        fit.slope_gap = sol.c[1];
        fit.nonuniform_slope = sol.c[2];
        fit.active_pairs = detail::active(p, sol, samples);
        if (!opts.rate_bound) return fit;
        p.objectives = {{0.0, 1.0, 0.0}};
        const lp::Solution rb = lp::solve(p, opts.method);
        fit.rate_bound_feasible = rb.feasible;
        fit.rate_bound = rb.c[1];
    }
    return fit;
}

/// Largest violation of the fitted inequality over `samples` (<= 0 when all hold).
inline double envelope_violation(const EnvelopeFit& fit, const std::vector<EnvelopeSample>& samples) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& smp : samples) {
        double v = 0.0;
        switch (fit.kind) {
            case EnvelopeKind::Lower:
                v = fit.slope_gap * (smp.t - smp.s) - fit.nonuniform_slope * smp.s + fit.intercept - smp.value;
                break;
            case EnvelopeKind::Upper:
                v = smp.value - (fit.intercept - fit.slope_gap * smp.gap() + fit.nonuniform_slope * smp.anchor());
                break;
            case EnvelopeKind::Growth:
                v = smp.value - (fit.intercept + fit.slope_gap * smp.gap() + fit.nonuniform_slope * smp.anchor());
                break;
        }
        worst = std::max(worst, v);
    }
    return worst;
}

}  // namespace lyapsep
