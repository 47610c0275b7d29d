// lyapsep command-line front end. Every subcommand prints a table to stdout and writes a JSON
// report to --out. Exit codes: 0 ok, 1 usage/input error, 2 infeasible analysis, 3 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lyapsep.hpp"

using namespace lyapsep;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNumerical = 3;

struct Knobs {
    std::string system;
    double T = kDefaultHorizon;
    double h = kDefaultStep;
    double tol = kDefaultTol;
    std::string out = "report.json";
    std::string csv;
    std::size_t max_pairs = kDefaultMaxPairs;
    double cap = kDefaultInterceptCap;
    double a_min = kDefaultAMin;
    double alpha_min = kDefaultAlphaMin;
    double tail = kDefaultTailFraction;
    double gap_tol = kDefaultGapTol;
    double resolution = kDefaultResolution;
    std::string mode = "relaxed";
};

FitMode parse_mode(const std::string& m) { return m == "strict" ? FitMode::Strict : FitMode::Relaxed; }

void add_common(CLI::App* app, Knobs& k, bool with_system = true) {
    if (with_system) app->add_option("--system", k.system, "catalog name, name:p1,p2,... or config path")->capture_default_str();
    app->add_option("--T", k.T, "horizon")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--h", k.h, "output grid step")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--tol", k.tol, "integrator tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--out", k.out, "JSON report path")->capture_default_str();
    app->add_option("--csv", k.csv, "optional CSV path");
}

void add_fit_knobs(CLI::App* app, Knobs& k) {
    app->add_option("--max-pairs", k.max_pairs, "pair-grid budget")->capture_default_str()->check(CLI::Range(100, 10000000));
    app->add_option("--cap", k.cap, "intercept cap")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_exponent_knobs(CLI::App* app, Knobs& k) {
    app->add_option("--tail", k.tail, "tail fraction for the limsup estimator")->capture_default_str()->check(CLI::Range(1e-6, 0.999999));
    app->add_option("--gap-tol", k.gap_tol, "exponent clustering tolerance")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_mode(CLI::App* app, Knobs& k) {
    app->add_option("--mode", k.mode, "strict or relaxed")->capture_default_str()->check(CLI::IsMember({"strict", "relaxed"}));
    app->add_option("--alpha-min", k.alpha_min, "minimum dichotomy rate")->capture_default_str()->check(CLI::PositiveNumber);
}

Json knobs_json(const Knobs& k, const std::vector<std::string>& keys) {
    Json j;
    for (const auto& key : keys) {
        if (key == "T") j["T"] = k.T;
        else if (key == "h") j["h"] = k.h;
        else if (key == "tol") j["tol"] = k.tol;
        else if (key == "max_pairs") j["max_pairs"] = k.max_pairs;
        else if (key == "intercept_cap") j["intercept_cap"] = k.cap;
        else if (key == "a_min") j["a_min"] = k.a_min;
        else if (key == "alpha_min") j["alpha_min"] = k.alpha_min;
        else if (key == "tail_fraction") j["tail_fraction"] = k.tail;
        else if (key == "gap_tol") j["gap_tol"] = k.gap_tol;
        else if (key == "resolution") j["resolution"] = k.resolution;
        else if (key == "mode") j["mode"] = k.mode;
    }
    return j;
}

void write_report(const std::string& path, const Json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write report '" + path + "'");
    os << report::dump(j);
}

template <class F>
void write_csv(const std::string& path, F&& f) {
    if (path.empty()) return;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write CSV '" + path + "'");
    f(os);
}

std::string fmt(double v, int prec = 4) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << v;
    return os.str();
}

void row(const std::string& key, const std::string& value) { std::cout << "  " << std::left << std::setw(28) << key << value << '\n'; }

void title(const std::string& s) { std::cout << s << '\n'; }

std::string list(const std::vector<double>& v, int prec = 4) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i], prec);
    return s + "]";
}

std::string intervals_str(const std::vector<Interval>& v) {
    std::string s;
    for (const auto& iv : v) s += (s.empty() ? "" : " ") + ("[" + fmt(iv.lo, 3) + ", " + fmt(iv.hi, 3) + "]");
    return s.empty() ? "(empty)" : s;
}

System load(const Knobs& k) {
    if (k.system.empty()) throw InvalidArgument("--system is required");
    return resolve_system(k.system);
}

Trajectory run_integrate(const System& sys, const Knobs& k, IntegrateOptions io = {}) {
    return integrate(sys, k.T, k.h, k.tol, io);
}

void print_system(const System& sys, const Trajectory* tr) {
    title("system " + sys.name() + " (n=" + std::to_string(sys.dim()) + (sys.is_diagonal() ? ", diagonal)" : ")"));
    for (const auto& note : sys.notes()) row("note", note);
    if (tr) row("grid", "T=" + fmt(tr->horizon(), 2) + " h=" + fmt(tr->step(), 6) + " steps=" + std::to_string(tr->steps()));
}

Json base_report(const std::string& command, const System& sys, const Trajectory* tr, const Json& knobs) {
    Json j = report::header(command);
    j["knobs"] = knobs;
    j["system"] = report::system(sys);
    if (tr) j["trajectory"] = report::trajectory(*tr);
    return j;
}

// ---------------------------------------------------------------------------

int cmd_parse_check(const std::string& path, const Knobs& k) {
    const SystemConfig cfg = parse_config(read_file(path));
    const System sys = load_system(read_file(path));
    print_system(sys, nullptr);
    for (std::size_t i = 0; i < sys.dim(); ++i)
        for (std::size_t j = 0; j < sys.dim(); ++j) {
            const Expr& e = sys.entries()[i * sys.dim() + j];
            if (!e.is_zero_literal()) row("A[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]", e.to_string());
        }
    Json rep = base_report("parse-check", sys, nullptr, Json::object());
    if (cfg.b) {
        const Perturbation p = load_perturbation(cfg);
        row("perturbation", p.label());
        rep["perturbation"] = report::perturbation(p);
    } else {
        rep["perturbation"] = nullptr;
    }
    row("status", "ok");
    rep["status"] = "ok";
    write_report(k.out, rep);
    return kExitOk;
}

int cmd_exponents(const Knobs& k) {
    const System sys = load(k);
    IntegrateOptions io;
    io.store_frames = false;
    const Trajectory tr = run_integrate(sys, k, io);
    const ExponentReport r = exponents(tr, k.tail);
    print_system(sys, &tr);
    row("exponents (system order)", list(r.values));
    for (const auto& c : distinct_exponents(r, k.gap_tol))
        row("cluster", fmt(c.value) + " x" + std::to_string(c.multiplicity));
    row("converged", r.converged ? "yes" : "no");
    Json rep = base_report("exponents", sys, &tr, knobs_json(k, {"T", "h", "tol", "tail_fraction", "gap_tol"}));
    rep["exponents"] = report::exponents(r, k.gap_tol);
    if (sys.is_diagonal()) {
        const double defect = regularity_defect(tr, k.tail);
        row("regularity defect", fmt(defect) + (defect <= kRegularDefectTol ? " (regular numerically)" : ""));
        rep["regularity"] = {{"defect", report::num(defect)}, {"regular", defect <= kRegularDefectTol}};
    } else {
        rep["regularity"] = nullptr;
    }
    write_csv(k.csv, [&](std::ostream& os) { write_rate_csv(tr, os); });
    write_report(k.out, rep);
    return kExitOk;
}

int cmd_separation(const Knobs& k) {
    const System sys = load(k);
    const Trajectory tr = run_integrate(sys, k);
    const PairGrid grid = pair_grid(tr, k.max_pairs);
    SeparationOptions so;
    so.a_min = k.a_min;
    so.intercept_cap = k.cap;
    const SystemCertificates c = system_certificates(tr, grid, so);
    print_system(sys, &tr);
    for (const auto& p : c.pairs) {
        row("pair " + std::to_string(p.pair) + " (" + std::to_string(p.lower + 1) + "->" + std::to_string(p.upper + 1) + ")",
            std::string(to_string(p.classification)) + "  a=" + fmt(p.fit.slope_gap) + " b=" + fmt(p.fit.nonuniform_slope) +
                " D=" + fmt(-p.fit.intercept) + " uniform a=" + fmt(p.uniform_fit.slope_gap) + " [" + to_string(p.form) + "]");
    }
    row("overall", to_string(c.overall));
    Json rep = base_report("separation", sys, &tr, knobs_json(k, {"T", "h", "tol", "max_pairs", "intercept_cap", "a_min"}));
    rep["grid"] = report::grid(grid);
    rep["separation"] = report::certificates(c);
    write_report(k.out, rep);
    return kExitOk;
}

int cmd_growth(const Knobs& k) {
    const System sys = load(k);
    const Trajectory tr = run_integrate(sys, k);
    const PairGrid grid = pair_grid(tr, k.max_pairs);
    Json rep = base_report("growth", sys, &tr, knobs_json(k, {"T", "h", "tol", "max_pairs", "intercept_cap"}));
    rep["grid"] = report::grid(grid);
    print_system(sys, &tr);
    try {
        const GrowthBound g = growth_bound(tr, grid, k.cap);
        row("log K", fmt(g.log_K));
        row("a_tilde", fmt(g.a_tilde));
        row("b_tilde", fmt(g.b_tilde));
        for (const auto& n : g.notes) row("note", n);
        rep["growth"] = report::growth(g);
    } catch (const Infeasible& e) {
        row("growth", std::string("infeasible: ") + e.what());
        rep["growth"] = nullptr;
        rep["error"] = e.what();
        write_report(k.out, rep);
        return kExitInfeasible;
    }
    write_report(k.out, rep);
    return kExitOk;
}

int cmd_dichotomy(const Knobs& k, double gamma, std::optional<std::size_t> rank) {
    const System sys = load(k);
    const Trajectory tr = run_integrate(sys, k);
    const PairGrid grid = pair_grid(tr, k.max_pairs);
    DichotomyData data = DichotomyData::all(tr, grid);
    const std::size_t r = rank ? *rank : rank_select(data.estimates(), gamma);
    if (r > sys.dim()) throw InvalidArgument("--rank exceeds the dimension");
    NedOptions ned;
    ned.intercept_cap = k.cap;
    ned.alpha_min = k.alpha_min;
    ned.mode = FitMode::Relaxed;
    const DichotomyFit relaxed = ned_fit(data, gamma, r, ned);
    ned.mode = FitMode::Strict;
    const DichotomyFit strict = ned_fit(data, gamma, r, ned);
    const DichotomyFit& asked = parse_mode(k.mode) == FitMode::Strict ? strict : relaxed;
    print_system(sys, &tr);
    row("gamma", fmt(gamma));
    row("rank", std::to_string(r) + (rank ? "" : " (from exponent estimates)"));
    for (const DichotomyFit* f : {&relaxed, &strict})
        row(std::string(to_string(f->mode)) + " verdict",
            std::string(f->verdict ? "dichotomy" : "no dichotomy") + "  alpha=" + fmt(f->alpha) + " eps=" + fmt(f->epsilon) +
                " logM=" + fmt(f->log_M));
    Json rep = base_report("dichotomy", sys, &tr,
                           knobs_json(k, {"T", "h", "tol", "max_pairs", "intercept_cap", "alpha_min", "mode"}));
    rep["grid"] = report::grid(grid);
    rep["exponent_estimates_ascending"] = report::nums(data.estimates());
    rep["dichotomy"] = {{"requested_mode", k.mode},
                        {"verdict", asked.verdict},
                        {"relaxed", report::dichotomy(relaxed)},
                        {"strict", report::dichotomy(strict)}};
    write_report(k.out, rep);
    return asked.verdict ? kExitOk : kExitInfeasible;
}

SpectrumOptions spectrum_options(const Knobs& k) {
    SpectrumOptions so;
    so.mode = parse_mode(k.mode);
    so.resolution = k.resolution;
    so.intercept_cap = k.cap;
    so.alpha_min = k.alpha_min;
    return so;
}

void spectrum_csv(std::ostream& os, const std::vector<const SpectrumResult*>& results) {
    os << "component,gamma,resolvent,rank,alpha,epsilon\n" << std::setprecision(17);
    for (std::size_t c = 0; c < results.size(); ++c)
        for (const auto& p : results[c]->probes)
            os << c << ',' << p.gamma << ',' << (p.resolvent ? 1 : 0) << ',' << p.rank << ',' << p.alpha << ',' << p.epsilon << '\n';
}

int cmd_spectrum(const Knobs& k, bool per_component) {
    const System sys = load(k);
    const Trajectory tr = run_integrate(sys, k);
    const PairGrid grid = pair_grid(tr, k.max_pairs);
    const SpectrumOptions so = spectrum_options(k);
    print_system(sys, &tr);
    Json rep = base_report("spectrum", sys, &tr,
                           knobs_json(k, {"T", "h", "tol", "max_pairs", "intercept_cap", "alpha_min", "mode", "resolution"}));
    rep["grid"] = report::grid(grid);
    std::vector<SpectrumResult> comps;
    if (per_component) {
        comps = component_spectra(tr, grid, so);
        Json arr = Json::array();
        for (std::size_t i = 0; i < comps.size(); ++i) {
            row("component " + std::to_string(i + 1), intervals_str(comps[i].intervals));
            arr.push_back(report::spectrum(comps[i]));
        }
        rep["component_spectra"] = arr;
    } else {
        rep["component_spectra"] = nullptr;
    }
    const SpectrumResult joint = scan(tr, grid, so);
    row("spectrum", intervals_str(joint.intervals));
    row("full spectrum", joint.full_spectrum ? "yes" : "no");
    row("scan range", "[" + fmt(joint.range_lo, 3) + ", " + fmt(joint.range_hi, 3) + "]");
    rep["spectrum"] = report::spectrum(joint);
    write_csv(k.csv, [&](std::ostream& os) {
        std::vector<const SpectrumResult*> all{&joint};
        for (const auto& c : comps) all.push_back(&c);
        spectrum_csv(os, all);
    });
    write_report(k.out, rep);
    return kExitOk;
}

int cmd_splitting(const Knobs& k, std::size_t j, std::optional<double> lambda) {
    const System sys = load(k);
    const Trajectory tr = run_integrate(sys, k);
    if (!lambda) {
        auto cl = distinct_exponents(exponents(tr, k.tail), k.gap_tol);
        std::reverse(cl.begin(), cl.end());
        if (j < 1 || j >= cl.size()) throw InvalidArgument("gap index j must lie in 1..(number of exponent clusters - 1)");
        lambda = 0.5 * (cl[j - 1].value + cl[j].value);
    }
    SplittingOptions so;
    so.mode = parse_mode(k.mode);
    so.a_min = k.a_min;
    so.intercept_cap = k.cap;
    so.alpha_min = k.alpha_min;
    so.resolution = k.resolution;
    so.gap_tol = k.gap_tol;
    so.max_pairs = k.max_pairs;
    const SplittingResult r = splitting_test(tr, j, *lambda, so);
    print_system(sys, &tr);
    row("j, lambda", std::to_string(j) + ", " + fmt(*lambda));
    row("lambda in exponent gap", r.in_exponent_gap ? "yes" : "no");
    row("augmented weakly separated", r.augmented_weakly_separated ? "yes" : "no");
    row("dichotomy at lambda", r.lambda_resolvent ? "yes" : "no");
    row("spectrum", intervals_str(r.spectrum.intervals));
    row("full spectrum", r.spectrum.full_spectrum ? "yes" : "no");
    row("split at lambda", r.split ? "yes" : "no");
    Json rep = base_report("splitting", sys, &tr,
                           knobs_json(k, {"T", "h", "tol", "max_pairs", "intercept_cap", "a_min", "alpha_min", "mode",
                                          "resolution", "gap_tol", "tail_fraction"}));
    rep["splitting"] = report::splitting(r);
    write_report(k.out, rep);
    return kExitOk;
}

int cmd_transform(const Knobs& k, std::size_t stride, double threshold) {
    const System sys = load(k);
    IntegrateOptions io;
    io.force_general = true;
    const Trajectory tr = run_integrate(sys, k, io);
    const TransformDiagnostics d = diagnostics(tr, stride, threshold);
    const Trajectory rec = recovered_diagonal(tr);
    std::vector<double> err(sys.dim(), 0.0);
    for (std::size_t s = 0; s <= tr.steps(); ++s)
        for (std::size_t i = 0; i < sys.dim(); ++i) err[i] = std::max(err[i], std::abs(rec.lognorm(s, i) - tr.lognorm(s, i)));
    print_system(sys, &tr);
    row("sup |T|", fmt(d.sup_T, 6));
    row("sup |T^-1|", fmt(d.sup_T_inv, 6));
    row("sup |T'|", fmt(d.sup_T_dot, 6));
    row("gram min", fmt(d.gram_min, 6) + " at t=" + fmt(d.gram_min_t, 2));
    row("bounded", d.bounded ? "yes" : "no");
    row("recovered log-norm error", list(err, 10));
    for (const auto& w : d.warnings) row("warning", w);
    Json rep = base_report("transform", sys, &tr, knobs_json(k, {"T", "h", "tol"}));
    rep["transform"] = report::transform(d, err);
    write_csv(k.csv, [&](std::ostream& os) { write_transform_csv(tr, os, d.stride); });
    write_report(k.out, rep);
    return kExitOk;
}

void print_shifts(const ShiftReport& r) {
    row("perturbation class", r.perturbation_class);
    row("unperturbed exponents", list(r.unperturbed));
    row("perturbed exponents", list(r.perturbed));
    row("max shift", fmt(r.max_shift) + (r.stable ? " < " : " >= ") + fmt(r.epsilon) + (r.stable ? " (stable)" : " (not stable)"));
}

int cmd_perturb(const Knobs& k, const std::string& config, double epsilon, bool system_given) {
    const SystemConfig cfg = parse_config(read_file(config));
    const System sys = system_given ? resolve_system(k.system) : load_system(read_file(config));
    const Perturbation p = load_perturbation(cfg);
    ExperimentSettings es{k.T, k.h, k.tol, k.tail};
    const ShiftReport r = stability_experiment(sys, p, epsilon, es);
    print_system(sys, nullptr);
    print_shifts(r);
    Json rep = base_report("perturb", sys, nullptr, knobs_json(k, {"T", "h", "tol", "tail_fraction"}));
    rep["perturbation"] = report::perturbation(p);
    rep["experiment"] = report::shifts(r);
    write_report(k.out, rep);
    return kExitOk;
}

int cmd_perron(const Knobs& k, double delta, double epsilon) {
    ExperimentSettings es{k.T, k.h, k.tol, k.tail};
    const PerronDemo d = perron_demo(delta, es, epsilon);
    const System sys = catalog("perron-base");
    print_system(sys, nullptr);
    row("delta", fmt(delta));
    print_shifts(d.report);
    Json rep = base_report("demo perron", sys, nullptr, knobs_json(k, {"T", "h", "tol", "tail_fraction"}));
    rep["perturbation"] = report::perturbation(perron_perturbation(delta));
    rep["delta"] = delta;
    rep["experiment"] = report::shifts(d.report);
    write_report(k.out, rep);
    return kExitOk;
}

int run(int argc, char** argv) {
    CLI::App app{"Lyapunov exponents, integral separation and dichotomy spectra of x' = A(t)x"};
    // --h is the grid step, so help is long-form only (subcommands inherit this)
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    Knobs k;
    std::string config_path;
    double gamma = 0.0, epsilon = 0.1, delta = 0.1, perron_eps = 0.5, threshold = kBoundedThreshold;
    std::size_t rank = 0, j = 1, stride = 10;
    double lambda = 0.0;
    bool per_component = false;

    auto* parse = app.add_subcommand("parse-check", "validate a configuration file");
    parse->add_option("config", config_path, "configuration file")->required();
    parse->add_option("--out", k.out, "JSON report path")->capture_default_str();

    auto* expo = app.add_subcommand("exponents", "Lyapunov exponent estimates");
    add_common(expo, k);
    add_exponent_knobs(expo, k);

    auto* sep = app.add_subcommand("separation", "integral separation certificates");
    add_common(sep, k);
    add_fit_knobs(sep, k);
    sep->add_option("--a-min", k.a_min, "minimum separation rate")->capture_default_str()->check(CLI::PositiveNumber);

    auto* grow = app.add_subcommand("growth", "nonuniform bounded growth fit");
    add_common(grow, k);
    add_fit_knobs(grow, k);

    auto* dich = app.add_subcommand("dichotomy", "dichotomy fit for a shift");
    add_common(dich, k);
    add_fit_knobs(dich, k);
    add_mode(dich, k);
    dich->add_option("--gamma", gamma, "shift")->required();
    auto* rank_opt = dich->add_option("--rank", rank, "projection rank (default: exponents below gamma)");

    auto* spec = app.add_subcommand("spectrum", "dichotomy spectrum scan");
    add_common(spec, k);
    add_fit_knobs(spec, k);
    add_mode(spec, k);
    spec->add_option("--resolution", k.resolution, "scan step")->capture_default_str()->check(CLI::PositiveNumber);
    spec->add_flag("--per-component", per_component, "also scan each diagonal component alone");

    auto* split = app.add_subcommand("splitting", "exponent-gap splitting test");
    add_common(split, k);
    add_fit_knobs(split, k);
    add_mode(split, k);
    add_exponent_knobs(split, k);
    split->add_option("--a-min", k.a_min, "minimum separation rate")->capture_default_str()->check(CLI::PositiveNumber);
    split->add_option("--resolution", k.resolution, "scan step")->capture_default_str()->check(CLI::PositiveNumber);
    split->add_option("--j", j, "gap index in ascending cluster order")->required();
    auto* lambda_opt = split->add_option("--lambda", lambda, "inserted rate (default: gap midpoint)");

    auto* tf = app.add_subcommand("transform", "diagonalizing transformation diagnostics");
    add_common(tf, k);
    tf->add_option("--stride", stride, "grid stride for the sups")->capture_default_str()->check(CLI::PositiveNumber);
    tf->add_option("--threshold", threshold, "bounded threshold")->capture_default_str()->check(CLI::PositiveNumber);

    auto* pert = app.add_subcommand("perturb", "exponent stability under a perturbation");
    add_common(pert, k);
    add_exponent_knobs(pert, k);
    pert->add_option("--config", config_path, "configuration with B entries")->required();
    pert->add_option("--epsilon", epsilon, "stability threshold on the max shift")->capture_default_str()->check(CLI::PositiveNumber);

    auto* demo = app.add_subcommand("demo", "built-in demonstrations");
    demo->require_subcommand(1);
    auto* perron = demo->add_subcommand("perron", "off-diagonal perturbation shifting a zero exponent");
    Knobs perron_k;
    perron_k.T = 2e4;
    add_common(perron, perron_k, false);
    add_exponent_knobs(perron, perron_k);
    perron->add_option("--delta", delta, "perturbation size in [0, 1]")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    perron->add_option("--epsilon", perron_eps, "stability threshold on the max shift")->capture_default_str()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (static_cast<double>(std::ceil(k.T / k.h)) > kMaxGridPoints || std::ceil(perron_k.T / perron_k.h) > kMaxGridPoints) {
        std::cerr << "error: T/h exceeds " << kMaxGridPoints << " grid points\n";
        return kExitUsage;
    }

    try {
        if (*parse) return cmd_parse_check(config_path, k);
        if (*expo) return cmd_exponents(k);
        if (*sep) return cmd_separation(k);
        if (*grow) return cmd_growth(k);
        if (*dich) return cmd_dichotomy(k, gamma, rank_opt->count() ? std::optional<std::size_t>(rank) : std::nullopt);
        if (*spec) return cmd_spectrum(k, per_component);
        if (*split) return cmd_splitting(k, j, lambda_opt->count() ? std::optional<double>(lambda) : std::nullopt);
        if (*tf) return cmd_transform(k, stride, threshold);
        if (*pert) return cmd_perturb(k, config_path, epsilon, pert->count("--system") > 0);
        if (*perron) return cmd_perron(perron_k, delta, perron_eps);
    } catch (const Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const DomainError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
