#pragma once

// Structured JSON reports. Keys keep insertion order and nothing time- or host-dependent is
// written, so identical inputs give byte-identical output. Layout is documented in docs/report-schema.md.

#include <json.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "lyapsep/dichotomy.hpp"
#include "lyapsep/envelope.hpp"
#include "lyapsep/lyapunov.hpp"
#include "lyapsep/perturb.hpp"
#include "lyapsep/propagator.hpp"
#include "lyapsep/separation.hpp"
#include "lyapsep/spectrum.hpp"
#include "lyapsep/system.hpp"
#include "lyapsep/transform.hpp"

namespace lyapsep {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

namespace report {

// Non-finite values become null (JSON has no inf).
inline Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json nums(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

inline Json one_based(const std::vector<std::size_t>& v) {
    Json a = Json::array();
    for (std::size_t i : v) a.push_back(i + 1);
    return a;
}

inline Json header(const std::string& command) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["tool"] = "lyapsep";
    j["tool_version"] = kToolVersion;
    j["command"] = command;
    return j;
}

inline Json system(const System& sys) {
    Json j;
    j["name"] = sys.name();
    j["n"] = sys.dim();
    j["diagonal"] = sys.is_diagonal();
    Json rows = Json::array();
    for (std::size_t i = 0; i < sys.dim(); ++i) {
        Json row = Json::array();
        for (std::size_t k = 0; k < sys.dim(); ++k) row.push_back(sys.entries()[i * sys.dim() + k].to_string());
        rows.push_back(row);
    }
    j["A"] = rows;
    j["notes"] = sys.notes();
    return j;
}

inline Json trajectory(const Trajectory& tr) {
    Json j;
    j["T"] = tr.horizon();
    j["h"] = tr.step();
    j["steps"] = tr.steps();
    j["tol"] = tr.tol();
    j["path"] = tr.diagonal_flow() ? "quadrature" : "matrix";
    j["accepted_steps"] = tr.stats().accepted;
    j["rejected_steps"] = tr.stats().rejected;
    j["rhs_evals"] = tr.stats().rhs_evals;
    return j;
}

inline Json grid(const PairGrid& g) {
    Json j;
    j["pairs"] = g.size();
    j["max_pairs"] = g.max_pairs;
    j["anchors"] = g.anchors;
    j["bases"] = g.bases;
    j["gaps"] = g.gaps;
    return j;
}

inline Json exponents(const ExponentReport& r, double gap_tol) {
    Json j;
    j["values"] = nums(r.values);
    j["sorted_descending"] = nums(r.sorted_descending());
    Json cl = Json::array();
    for (const auto& c : distinct_exponents(r, gap_tol)) cl.push_back({{"value", num(c.value)}, {"multiplicity", c.multiplicity}});
    j["clusters"] = cl;
    j["gap_tol"] = gap_tol;
    j["tail_fraction"] = r.tail_fraction;
    Json w = Json::array();
    for (const auto& win : r.windows)
        w.push_back({{"t_begin", num(win.t_begin)}, {"t_end", num(win.t_end)}, {"running_max", nums(win.running_max)}});
    j["tail_windows"] = w;
    j["converged"] = r.converged;
    return j;
}

inline Json fit(const EnvelopeFit& f) {
    Json j;
    j["kind"] = to_string(f.kind);
    j["mode"] = to_string(f.mode);
    j["feasible"] = f.feasible;
    j["slope_gap"] = num(f.slope_gap);
    j["nonuniform_slope"] = num(f.nonuniform_slope);
    j["intercept"] = num(f.intercept);
    j["intercept_cap"] = f.intercept_cap;
    j["reference_gap"] = num(f.reference_gap);
    if (f.rate_bound_feasible) j["rate_bound"] = num(f.rate_bound);
    else j["rate_bound"] = nullptr;
    j["sample_count"] = f.sample_count;
    Json act = Json::array();
    for (const auto& s : f.active_pairs) act.push_back({{"s", num(s.s)}, {"t", num(s.t)}, {"value", num(s.value)}});
    j["active_pairs"] = act;
    return j;
}

inline Json certificates(const SystemCertificates& c) {
    Json j;
    j["ascending_order"] = one_based(c.order);
    std::vector<std::size_t> desc(c.order.rbegin(), c.order.rend());
    j["descending_order"] = one_based(desc);
    j["overall"] = to_string(c.overall);
    Json pairs = Json::array();
    for (const auto& p : c.pairs) {
        Json q;
        q["pair"] = p.pair;
        q["lower_component"] = p.lower + 1;
        q["upper_component"] = p.upper + 1;
        q["form"] = to_string(p.form);
        q["classification"] = to_string(p.classification);
        q["a_min"] = p.a_min;
        q["a"] = num(p.fit.slope_gap);
        q["b"] = num(p.fit.nonuniform_slope);
        q["D"] = num(-p.fit.intercept);
        q["fit"] = fit(p.fit);
        q["uniform_fit"] = fit(p.uniform_fit);
        pairs.push_back(q);
    }
    j["pairs"] = pairs;
    return j;
}

inline Json growth(const GrowthBound& g) {
    Json j;
    j["log_K"] = num(g.log_K);
    j["a_tilde"] = num(g.a_tilde);
    j["b_tilde"] = num(g.b_tilde);
    j["notes"] = g.notes;
    j["fit"] = fit(g.fit);
    return j;
}

inline Json dichotomy(const DichotomyFit& f) {
    Json j;
    j["gamma"] = num(f.gamma);
    j["rank"] = f.rank;
    j["mode"] = to_string(f.mode);
    j["stable_components"] = one_based(f.stable_components);
    j["unstable_components"] = one_based(f.unstable_components);
    j["alpha"] = num(f.alpha);
    j["epsilon"] = num(f.epsilon);
    j["log_M"] = num(f.log_M);
    j["alpha_min"] = f.alpha_min;
    j["verdict"] = f.verdict;
    j["stable_fit"] = f.has_stable ? fit(f.stable) : Json(nullptr);
    j["unstable_fit"] = f.has_unstable ? fit(f.unstable) : Json(nullptr);
    return j;
}

inline Json intervals(const std::vector<Interval>& v) {
    Json a = Json::array();
    for (const auto& iv : v) a.push_back(Json::array({num(iv.lo), num(iv.hi)}));
    return a;
}

inline Json spectrum(const SpectrumResult& r) {
    Json j;
    j["mode"] = to_string(r.mode);
    j["resolution"] = r.resolution;
    j["range"] = Json::array({num(r.range_lo), num(r.range_hi)});
    j["intervals"] = intervals(r.intervals);
    j["full_spectrum"] = r.full_spectrum;
    j["dim"] = r.dim;
    j["growth"] = growth(r.growth);
    Json b = Json::array();
    for (const auto& x : r.boundaries)
        b.push_back({{"gamma", num(x.gamma)},
                     {"bracket", Json::array({num(x.bracket_lo), num(x.bracket_hi)})},
                     {"resolvent_below", x.resolvent_below},
                     {"resolvent_minus_resolution", x.resolvent_minus},
                     {"resolvent_plus_resolution", x.resolvent_plus}});
    j["boundaries"] = b;
    Json p = Json::array();
    for (const auto& x : r.probes)
        p.push_back({{"gamma", num(x.gamma)}, {"resolvent", x.resolvent}, {"rank", x.rank}, {"alpha", num(x.alpha)},
                     {"epsilon", num(x.epsilon)}});
    j["probes"] = p;
    return j;
}

inline Json splitting(const SplittingResult& r) {
    Json j;
    j["j"] = r.j;
    j["lambda"] = num(r.lambda);
    Json cl = Json::array();
    for (const auto& c : r.clusters) cl.push_back({{"value", num(c.value)}, {"multiplicity", c.multiplicity}});
    j["clusters_ascending"] = cl;
    j["in_exponent_gap"] = r.in_exponent_gap;
    j["augmented_weakly_separated"] = r.augmented_weakly_separated;
    j["lambda_resolvent"] = r.lambda_resolvent;
    j["split"] = r.split;
    j["verdict"] = r.in_exponent_gap && r.augmented_weakly_separated && r.lambda_resolvent && r.split;
    j["full_spectrum"] = r.spectrum.full_spectrum;
    j["augmented_certificates"] = r.augmented ? certificates(*r.augmented) : Json(nullptr);
    j["dichotomy"] = dichotomy(r.dichotomy);
    j["spectrum"] = spectrum(r.spectrum);
    return j;
}

inline Json transform(const TransformDiagnostics& d, const std::vector<double>& recovered_minus_original) {
    Json j;
    j["sup_T"] = num(d.sup_T);
    j["sup_T_inv"] = num(d.sup_T_inv);
    j["sup_T_dot"] = num(d.sup_T_dot);
    j["gram_min"] = num(d.gram_min);
    j["gram_min_t"] = num(d.gram_min_t);
    j["threshold"] = d.threshold;
    j["stride"] = d.stride;
    j["bounded"] = d.bounded;
    j["recovered_lognorm_max_error"] = nums(recovered_minus_original);
    j["warnings"] = d.warnings;
    return j;
}

inline Json perturbation(const Perturbation& p) {
    Json j;
    Json rows = Json::array();
    for (std::size_t i = 0; i < p.dim(); ++i) {
        Json row = Json::array();
        for (std::size_t k = 0; k < p.dim(); ++k) row.push_back(p.entries()[i * p.dim() + k].to_string());
        rows.push_back(row);
    }
    j["B"] = rows;
    j["class"] = p.label();
    if (p.decay()) j["decay"] = {{"delta", p.decay()->delta}, {"beta", p.decay()->beta}};
    else j["decay"] = nullptr;
    j["measured_sup"] = num(p.measured_sup());
    return j;
}

inline Json shifts(const ShiftReport& r) {
    Json j;
    j["unperturbed"] = nums(r.unperturbed);
    j["perturbed"] = nums(r.perturbed);
    j["shifts"] = nums(r.shifts);
    j["max_shift"] = num(r.max_shift);
    j["epsilon"] = r.epsilon;
    j["stable"] = r.stable;
    j["perturbation_class"] = r.perturbation_class;
    j["unperturbed_converged"] = r.unperturbed_converged;
    j["perturbed_converged"] = r.perturbed_converged;
    return j;
}

/// Two-space indented dump with a trailing newline.
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace report
}  // namespace lyapsep
