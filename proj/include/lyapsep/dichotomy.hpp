#pragma once

// Nonuniform bounded growth and dichotomy fits for a shift gamma and a coordinate projection.
//
// Both blocks are fitted in the same upper form over pairs (earlier, later):
//   stable:   log|Phi(later) P Phi^-1(earlier)| - gamma*gap <= log M - alpha*gap + eps*earlier
//   unstable: log|Phi(earlier) Q Phi^-1(later)| + gamma*gap <= log M - alpha*gap + eps*earlier
// The anchor of the nonuniform term is the earlier time of each pair.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "lyapsep/envelope.hpp"
#include "lyapsep/errors.hpp"
#include "lyapsep/lyapunov.hpp"
#include "lyapsep/propagator.hpp"
#include "lyapsep/separation.hpp"

namespace lyapsep {

inline constexpr double kDefaultAlphaMin = 0.05;

struct GrowthBound {
    EnvelopeFit fit;
    double log_K = 0.0;
    double a_tilde = 0.0;
    double b_tilde = 0.0;
    std::vector<std::string> notes;
};

struct NedOptions {
    FitMode mode = FitMode::Relaxed;
    double intercept_cap = kDefaultInterceptCap;
    double alpha_min = kDefaultAlphaMin;
    EnvelopeOptions envelope;
};

struct DichotomyFit {
    double gamma = 0.0;
    std::size_t rank = 0;
    FitMode mode = FitMode::Relaxed;
    std::vector<std::size_t> stable_components, unstable_components;
    bool has_stable = false, has_unstable = false;
    EnvelopeFit stable, unstable;
    double alpha = 0.0, epsilon = 0.0, log_M = 0.0;
    double alpha_min = kDefaultAlphaMin;
    bool verdict = false;
};

/// Unshifted transition samples for a set of components, cached per projection rank.
/// Components are kept in ascending exponent order; rank k projects onto the first k.
/// Holds a reference to the trajectory, which must outlive it. Not thread-safe (lazy cache).
class DichotomyData {
public:
    DichotomyData(const Trajectory& tr, const PairGrid& grid, std::vector<std::size_t> components,
                  std::vector<double> estimates)
        : tr_(tr), grid_(grid), comps_(std::move(components)), est_(std::move(estimates)) {
        if (grid_.steps != tr_.steps()) throw InvalidArgument("pair grid does not match the trajectory grid");
        if (comps_.empty() || comps_.size() != est_.size()) throw InvalidArgument("bad component selection");
        for (std::size_t c : comps_)
            if (c >= tr_.dim()) throw InvalidArgument("component index out of range");
        if (comps_.size() != tr_.dim() && !tr_.diagonal_flow())
            throw InvalidArgument("component subsets need a diagonal system");
    }

    /// All components of the trajectory, ordered by exponent estimate.
    static DichotomyData all(const Trajectory& tr, const PairGrid& grid) {
        std::vector<double> values;
        if (tr.horizon() >= kMinExponentHorizon) {
            values = exponents(tr).values;
        } else {
            for (std::size_t i = 0; i < tr.dim(); ++i) values.push_back(tr.lognorm(tr.steps(), i) / tr.horizon());
        }
        ExponentReport rep;
        rep.values = values;
        std::vector<std::size_t> order = rep.ascending();
        std::vector<double> est;
        for (std::size_t i : order) est.push_back(values[i]);
        return DichotomyData(tr, grid, std::move(order), std::move(est));
    }

    const Trajectory& trajectory() const noexcept { return tr_; }
    const PairGrid& grid() const noexcept { return grid_; }
    std::size_t dim() const noexcept { return comps_.size(); }
    const std::vector<std::size_t>& components() const noexcept { return comps_; }
    const std::vector<double>& estimates() const noexcept { return est_; }

    Block stable_block(std::size_t k) const { return Block(comps_.begin(), comps_.begin() + static_cast<long>(k)); }
    Block unstable_block(std::size_t k) const { return Block(comps_.begin() + static_cast<long>(k), comps_.end()); }

    /// Pairs (earlier, later) with value log|Phi(later) P Phi^-1(earlier)|.
    const std::vector<EnvelopeSample>& forward(std::size_t k) { return cached(fwd_, k, true); }
    /// Pairs with s = later, t = earlier and value log|Phi(earlier) Q Phi^-1(later)|.
    const std::vector<EnvelopeSample>& backward(std::size_t k) { return cached(bwd_, k, false); }

private:
    const std::vector<EnvelopeSample>& cached(std::map<std::size_t, std::vector<EnvelopeSample>>& cache, std::size_t k,
                                              bool fwd) {
        auto it = cache.find(k);
        if (it != cache.end()) return it->second;
        const Block block = fwd ? stable_block(k) : unstable_block(k);
        std::vector<EnvelopeSample> out;
        out.reserve(grid_.size());
        for (const auto& [m, l] : grid_.pairs) {
            if (fwd)
                out.push_back({tr_.time(m), tr_.time(l), transition_lognorm_idx(tr_, m, l, block)});
            else
                out.push_back({tr_.time(l), tr_.time(m), transition_lognorm_idx(tr_, l, m, block)});
        }
        return cache.emplace(k, std::move(out)).first->second;
    }

    const Trajectory& tr_;
    PairGrid grid_;
    std::vector<std::size_t> comps_;
    std::vector<double> est_;
    std::map<std::size_t, std::vector<EnvelopeSample>> fwd_, bwd_;
};

/// Envelope of the full transition log-norm over both time orders.
inline GrowthBound growth_bound(DichotomyData& data, double intercept_cap = kDefaultInterceptCap,
                                const EnvelopeOptions& opts = {}) {
    const std::size_t n = data.dim();
    std::vector<EnvelopeSample> samples = data.forward(n);
    const auto& back = data.backward(0);
    samples.insert(samples.end(), back.begin(), back.end());
    GrowthBound g;
    g.fit = fit_growth(samples, intercept_cap, opts);
    if (!g.fit.feasible) throw Infeasible("no growth envelope within the intercept cap");
    g.log_K = g.fit.intercept;
    g.a_tilde = g.fit.slope_gap;
    g.b_tilde = g.fit.nonuniform_slope;
    if (g.a_tilde < 1e-9) g.notes.push_back("a_tilde fitted at its floor 0");
    return g;
}

inline GrowthBound growth_bound(const Trajectory& tr, const PairGrid& grid, double intercept_cap = kDefaultInterceptCap) {
    DichotomyData data = DichotomyData::all(tr, grid);
    return growth_bound(data, intercept_cap);
}

/// Number of estimates strictly below gamma.
inline std::size_t rank_select(const std::vector<double>& estimates, double gamma) {
    return static_cast<std::size_t>(std::count_if(estimates.begin(), estimates.end(), [&](double v) { return v < gamma; }));
}

inline std::size_t rank_select(const ExponentReport& rep, double gamma) { return rank_select(rep.values, gamma); }

inline DichotomyFit ned_fit(DichotomyData& data, double gamma, std::size_t k, const NedOptions& opts = {}) {
    const std::size_t n = data.dim();
    if (k > n) throw InvalidArgument("projection rank exceeds the dimension");
    DichotomyFit f;
    f.gamma = gamma;
    f.rank = k;
    f.mode = opts.mode;
    f.alpha_min = opts.alpha_min;
    f.stable_components = data.stable_block(k);
    f.unstable_components = data.unstable_block(k);

    bool ok = true;
    f.alpha = std::numeric_limits<double>::infinity();
    f.epsilon = 0.0;
    f.log_M = -std::numeric_limits<double>::infinity();
    auto absorb = [&](const EnvelopeFit& fit) {
        ok = ok && fit.feasible;
        f.alpha = std::min(f.alpha, fit.slope_gap);
        f.epsilon = std::max(f.epsilon, fit.nonuniform_slope);
        f.log_M = std::max(f.log_M, fit.intercept);
    };
    if (k > 0) {
        std::vector<EnvelopeSample> s = data.forward(k);
        for (auto& smp : s) smp.value -= gamma * smp.gap();
        f.stable = fit_upper(s, opts.intercept_cap, opts.mode, opts.envelope);
        f.has_stable = true;
        absorb(f.stable);
    }
    if (k < n) {
        std::vector<EnvelopeSample> s = data.backward(k);
        for (auto& smp : s) smp.value += gamma * smp.gap();
        f.unstable = fit_upper(s, opts.intercept_cap, opts.mode, opts.envelope);
        f.has_unstable = true;
        absorb(f.unstable);
    }
    f.verdict = ok && f.alpha >= opts.alpha_min && (opts.mode == FitMode::Relaxed || f.epsilon < f.alpha);
    return f;
}

/// Fit on all components of `tr`, ordered by exponent estimate.
inline DichotomyFit ned_fit(const Trajectory& tr, double gamma, std::size_t k, const PairGrid& grid,
                            const NedOptions& opts = {}) {
    DichotomyData data = DichotomyData::all(tr, grid);
    return ned_fit(data, gamma, k, opts);
}

}  // namespace lyapsep
