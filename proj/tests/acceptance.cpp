// Runs the acceptance checks and prints one PASS/FAIL line per criterion.
// Usage: acceptance [id ...]   (no ids: run all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "envelope_oracle.hpp"
#include "lyapsep/config.hpp"
#include "lyapsep/dichotomy.hpp"
#include "lyapsep/perturb.hpp"
#include "lyapsep/separation.hpp"
#include "lyapsep/spectrum.hpp"
#include "oracles.hpp"

using namespace lyapsep;

namespace {

// Collects failed conditions for one criterion.
struct Check {
    std::vector<std::string> failures;
    std::ostringstream info;

    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    void near(double got, double want, double tol, const std::string& what) {
        std::ostringstream os;
        os << what << " = " << got << " (want " << want << " +- " << tol << ")";
        expect(std::abs(got - want) <= tol, os.str());
    }
};

struct Criterion {
    int id;
    std::string name;
    double max_seconds;  // 0: no runtime limit
    std::function<void(Check&)> run;
};

Trajectory run_traj(const System& sys, double T, bool general = false) {
    IntegrateOptions io;
    io.force_general = general;
    return integrate(sys, T, kDefaultStep, kDefaultTol, io);
}

System random_diagonal(std::mt19937_64& rng) {
    return System::diagonal({Expr::parse(oracle::random_coefficient(rng)), Expr::parse(oracle::random_coefficient(rng))});
}

void intro_exponents(Check& c) {
    IntegrateOptions io;
    io.store_frames = false;
    const Trajectory tr = integrate(catalog("intro-regular"), 20000.0, kDefaultStep, kDefaultTol, io);
    const auto v = exponents(tr).sorted_descending();
    c.near(v[0], 1.0, 0.05, "lambda_1");
    c.near(v[1], 0.0, 0.05, "lambda_2");
    c.info << "exponents " << v[0] << ", " << v[1];
}

void example23_certificate(Check& c) {
    const Trajectory tr = run_traj(catalog("example-2-3"), 600.0);
    const PairGrid grid = pair_grid(tr);
    const SeparationCertificate cert = coefficient_certificate(tr, 1, grid);
    c.expect(cert.classification == Separation::WeaklyIntegrallySeparated, std::string("classification ") + to_string(cert.classification));
    c.expect(cert.fit.slope_gap >= 1.9 && cert.fit.slope_gap <= 2.05, "a = " + std::to_string(cert.fit.slope_gap));
    c.expect(cert.fit.nonuniform_slope >= 1.8 && cert.fit.nonuniform_slope <= 2.2, "b = " + std::to_string(cert.fit.nonuniform_slope));
    c.expect(!cert.uniform_fit.feasible || cert.uniform_fit.slope_gap < cert.a_min, "b=0 fit reaches a_min");
    const auto samples = separation_samples(tr, grid, cert.lower, cert.upper);
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const auto& x = samples[pick(rng)];
        worst = std::max(worst, std::abs(x.value - oracle::ex23_g(x.s, x.t)));
    }
    c.expect(worst <= 1e-8, "quadrature vs closed form " + std::to_string(worst));
    c.info << "a " << cert.fit.slope_gap << ", b " << cert.fit.nonuniform_slope << ", closed-form error " << worst;
}

void example32(Check& c) {
    const Trajectory tr = run_traj(catalog("example-3-2"), 600.0);
    const PairGrid grid = pair_grid(tr);
    const auto comps = component_spectra(tr, grid);
    c.expect(comps.size() == 2, "two component spectra");
    const double want[2][2] = {{0.0, 4.0}, {1.0, 7.0}};
    for (std::size_t i = 0; i < comps.size() && i < 2; ++i) {
        c.expect(comps[i].intervals.size() == 1, "component " + std::to_string(i + 1) + " is one interval");
        if (comps[i].intervals.empty()) continue;
        c.near(comps[i].intervals[0].lo, want[i][0], 0.15, "component " + std::to_string(i + 1) + " lo");
        c.near(comps[i].intervals[0].hi, want[i][1], 0.15, "component " + std::to_string(i + 1) + " hi");
    }
    const SpectrumResult joint = scan(tr, grid);
    c.expect(joint.intervals.size() == 1, "joint spectrum is one interval");
    if (!joint.intervals.empty()) {
        c.near(joint.intervals[0].lo, 0.0, 0.15, "joint lo");
        c.near(joint.intervals[0].hi, 7.0, 0.15, "joint hi");
    }
    c.expect(!joint.full_spectrum, "full_spectrum is false");
    const Trajectory gen = run_traj(catalog("example-3-2"), 600.0, true);
    const SeparationCertificate cert = column_certificate(gen, 1, pair_grid(gen));
    c.near(cert.fit.slope_gap, 1.0, 0.1, "column a");
    c.near(cert.fit.nonuniform_slope, 2.0, 0.2, "column b");
    c.info << "joint [" << (joint.intervals.empty() ? NAN : joint.intervals[0].lo) << ", "
           << (joint.intervals.empty() ? NAN : joint.intervals[0].hi) << "], column a " << cert.fit.slope_gap << " b "
           << cert.fit.nonuniform_slope;
}

void constant_pair(Check& c) {
    const Trajectory tr = run_traj(catalog("const-diag", {1, -1}), 600.0);
    const PairGrid grid = pair_grid(tr);
    const SpectrumResult r = scan(tr, grid);
    c.expect(r.intervals.size() == 2, "two spectral intervals");
    if (r.intervals.size() == 2) {
        c.near(r.intervals[0].lo, -1.0, 0.1, "first lo");
        c.near(r.intervals[0].hi, -1.0, 0.1, "first hi");
        c.near(r.intervals[1].lo, 1.0, 0.1, "second lo");
        c.near(r.intervals[1].hi, 1.0, 0.1, "second hi");
    }
    c.expect(r.full_spectrum, "full_spectrum is true");
    NedOptions o;
    o.mode = FitMode::Strict;
    const DichotomyFit f = ned_fit(tr, 0.0, 1, grid, o);
    c.expect(f.verdict, "strict fit verdict");
    c.near(f.alpha, 1.0, 0.02, "alpha");
    c.expect(f.epsilon <= 0.02, "epsilon " + std::to_string(f.epsilon));
    c.expect(f.log_M <= 0.05, "log M " + std::to_string(f.log_M));
    c.info << "alpha " << f.alpha << ", epsilon " << f.epsilon << ", log M " << f.log_M;
}

void perron(Check& c) {
    ExperimentSettings cfg;
    cfg.T = 2e4;
    const PerronDemo d = perron_demo(0.1, cfg);
    c.near(d.report.unperturbed[0], 0.0, 0.05, "unperturbed top");
    c.near(d.report.unperturbed[1], 0.0, 0.05, "unperturbed bottom");
    c.expect(d.report.perturbed[0] >= 0.5, "perturbed top " + std::to_string(d.report.perturbed[0]));
    // pin against fixed-step RK4 with QR steps on the same system
    const System sys = perturbed_system(catalog("perron-base"), perron_perturbation(0.1));
    const auto ref = oracle::qr_exponents([&](double t) { return sys.matrix(t); }, 2, cfg.T, 1e-2, cfg.tail_fraction);
    c.near(d.report.perturbed[0], ref[0], 0.2, "perturbed top vs oracle");
    const ShiftReport contrast = stability_experiment(catalog("perron-base"), decaying_perturbation(0.1, 0.1), 0.5, cfg);
    c.expect(contrast.max_shift <= 0.15, "decaying contrast shift " + std::to_string(contrast.max_shift));
    c.info << "perturbed top " << d.report.perturbed[0] << " (oracle " << ref[0] << "), decaying shift "
           << contrast.max_shift;
}

void equivalence(Check& c) {
    std::mt19937_64 rng(606);
    double worst = 0.0;
    for (int rep = 0; rep < 25; ++rep) {
        const System sys = random_diagonal(rng);
        const Trajectory q = run_traj(sys, 600.0);
        const Trajectory g = run_traj(sys, 600.0, true);
        SeparationOptions opts;
        opts.order = ascending_order(q);
        const PairGrid grid = pair_grid(q);
        const SeparationCertificate a = coefficient_certificate(q, 1, grid, opts);
        const SeparationCertificate b = column_certificate(g, 1, grid, opts);
        const std::string tag = "system " + std::to_string(rep + 1);
        c.expect(a.fit.feasible == b.fit.feasible, tag + " feasibility differs");
        if (!a.fit.feasible || !b.fit.feasible) continue;
        const double d = std::max(std::abs(a.fit.slope_gap - b.fit.slope_gap), std::abs(a.fit.nonuniform_slope - b.fit.nonuniform_slope));
        worst = std::max(worst, d);
        c.expect(d <= 1e-6, tag + " (a, b) differ by " + std::to_string(d));
    }
    c.info << "worst (a, b) difference " << worst;
}

void shift_identity(Check& c) {
    const System sys = catalog("example-3-2");
    const double T = 100.0;
    const Trajectory tr = run_traj(sys, T);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> g(-5, 5);
    std::uniform_int_distribution<std::size_t> pick(0, tr.steps());
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const double gamma = g(rng);
        const double s = tr.time(pick(rng)), t = tr.time(pick(rng));
        const Block block = rep % 3 == 2 ? full_block(2) : Block{static_cast<std::size_t>(rep % 3)};
        const Trajectory direct = run_traj(shift(sys, gamma), T);
        const double d = std::abs(shifted_transition_lognorm(tr, s, t, block, gamma) - transition_lognorm(direct, s, t, block));
        worst = std::max(worst, d);
    }
    c.expect(worst <= 1e-8, "worst difference " + std::to_string(worst));
    c.info << "worst difference " << worst;
}

void separated_scenario(Check& c) {
    const Trajectory tr = run_traj(System::diagonal({Expr::parse("-2"), Expr::parse("2 + cos(t)")}), 600.0);
    const PairGrid grid = pair_grid(tr);
    c.expect(system_certificates(tr, grid).overall != Separation::NotSeparated, "pair is weakly separated");
    NedOptions o;
    o.mode = FitMode::Strict;
    const DichotomyFit f = ned_fit(tr, 0.0, 1, grid, o);
    c.expect(f.verdict, "strict fit verdict");
    c.expect(f.epsilon <= 0.05, "epsilon " + std::to_string(f.epsilon));
    c.info << "alpha " << f.alpha << ", epsilon " << f.epsilon;
}

void splitting(Check& c) {
    const Trajectory e = run_traj(catalog("example-2-3"), 600.0);
    const SplittingResult r = splitting_test(e, 1, 2.0);
    c.expect(r.in_exponent_gap, "lambda in exponent gap");
    c.expect(r.augmented_weakly_separated, "augmented system weakly separated");
    c.expect(r.lambda_resolvent, "lambda resolvent");
    c.expect(r.split, "split");
    const SpectrumResult s = scan(e, pair_grid(e));
    c.expect(full_spectrum_check(s, 2), "full spectrum");
    if (s.intervals.size() == 2) {
        c.near(s.intervals[0].lo, -1.0, 0.15, "first lo");
        c.near(s.intervals[0].hi, 1.0, 0.15, "first hi");
        c.near(s.intervals[1].lo, 3.0, 0.15, "second lo");
        c.near(s.intervals[1].hi, 3.0, 0.15, "second hi");
    }
    const Trajectory o = run_traj(catalog("example-3-2"), 600.0);
    c.expect(!splitting_test(o, 1, 0.5).split, "example 3-2 does not split at 0.5");
}

void envelope_exactness(Check& c) {
    std::mt19937_64 rng(2024);
    const auto ex = envtest::exactness_suite(rng, 200);
    c.expect(ex.checked == 200 && ex.failures == 0, std::to_string(ex.failures) + " exactness failures");
    std::mt19937_64 rng2(77);
    const int mono = envtest::monotonicity_suite(rng2, 200);
    c.expect(mono == 0, std::to_string(mono) + " monotonicity failures");
    std::mt19937_64 rng3(31);
    const auto off = envtest::offset_suite(rng3, 200);
    c.expect(off.failures == 0, std::to_string(off.failures) + " offset failures");
    c.info << "worst rate " << ex.worst_rate << ", worst solver gap " << ex.worst_solvers << ", offset fits " << off.checked;
}

void localization(Check& c) {
    std::mt19937_64 rng(4242);
    int probes = 0;
    for (int rep = 0; rep < 10; ++rep) {
        const System sys = random_diagonal(rng);
        const Trajectory tr = run_traj(sys, 600.0);
        DichotomyData data = DichotomyData::all(tr, pair_grid(tr));
        const GrowthBound g = growth_bound(data);
        const double R = g.a_tilde + g.b_tilde + 1.0;
        for (double extra : {1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0})
            for (double gamma : {R + extra, -R - extra}) {
                ++probes;
                if (!classify_shift(data, gamma, SpectrumOptions{}).resolvent)
                    c.expect(false, "system " + std::to_string(rep + 1) + " gamma " + std::to_string(gamma));
            }
    }
    c.info << probes << " shifts probed";
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "intro example exponents", 30.0, intro_exponents},
        {2, "example 2-3 certificate", 60.0, example23_certificate},
        {3, "example 3-2 spectra and column certificate", 180.0, example32},
        {4, "constant pair spectrum and strict fit", 0.0, constant_pair},
        {5, "Perron demo and decaying contrast", 0.0, perron},
        {6, "coefficient/column certificate equivalence", 0.0, equivalence},
        {7, "shift identity", 0.0, shift_identity},
        {8, "separated pair dichotomy", 0.0, separated_scenario},
        {9, "splitting with lambda inserted", 0.0, splitting},
        {10, "envelope LP exactness", 0.0, envelope_exactness},
        {11, "spectrum localization", 0.0, localization},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& cr : all) {
        if (!wanted.empty() && !wanted.count(cr.id)) continue;
        Check c;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            cr.run(c);
        } catch (const std::exception& e) {
            c.failures.push_back(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (cr.max_seconds > 0.0 && secs > cr.max_seconds)
            c.failures.push_back("runtime " + std::to_string(secs) + " s over " + std::to_string(cr.max_seconds) + " s");
        const bool ok = c.failures.empty();
        failed += ok ? 0 : 1;
        std::printf("criterion %2d: %s  %s (%.1f s)  %s\n", cr.id, ok ? "PASS" : "FAIL", cr.name.c_str(), secs, c.info.str().c_str());
        for (const auto& f : c.failures) std::printf("    %s\n", f.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
