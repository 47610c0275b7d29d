#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "lyapsep/config.hpp"
#include "lyapsep/lyapunov.hpp"
#include "oracles.hpp"

using namespace lyapsep;
using Catch::Approx;

namespace {
IntegrateOptions no_frames() {
    IntegrateOptions io;
    io.store_frames = false;
    return io;
}
}  // namespace

TEST_CASE("constant exponents", "[lyapunov]") {
    const Trajectory tr = integrate(catalog("const-diag", {1, -1}), 200.0, 0.01, 1e-10);
    const ExponentReport r = exponents(tr);
    CHECK(r.values[0] == Approx(1.0).margin(1e-6));
    CHECK(r.values[1] == Approx(-1.0).margin(1e-6));
    CHECK(r.converged);
    CHECK(regularity_defect(tr) == Approx(0.0).margin(1e-6));
    CHECK(r.descending() == std::vector<std::size_t>{0, 1});
    CHECK(r.ascending() == std::vector<std::size_t>{1, 0});
}

TEST_CASE("limsup of the oscillating scalar", "[lyapunov]") {
    // L(t)/t = 2 + 2 cos t - 2 sin t / t, limsup 4
    const Trajectory tr = integrate(System::diagonal({Expr::parse("2 - 2*t*sin(t)")}), 600.0, 0.01, 1e-10);
    const double est = exponents(tr).values[0];
    CHECK(est == Approx(4.0).margin(0.05));
    // oracle: closed-form tail max on the same grid
    double want = -1e300;
    for (std::size_t k = tr.index_of(480.0); k <= tr.steps(); ++k) want = std::max(want, oracle::ex32_L1(tr.time(k)) / tr.time(k));
    CHECK(est == Approx(want).margin(1e-9));
}

TEST_CASE("example 2-3 exponents and clusters", "[lyapunov]") {
    const Trajectory tr = integrate(catalog("example-2-3"), 600.0, 0.01, 1e-10);
    const auto cl = distinct_exponents(exponents(tr), 0.1);
    REQUIRE(cl.size() == 2);
    CHECK(cl[0].value == Approx(3.0).margin(0.05));
    CHECK(cl[1].value == Approx(1.0).margin(0.05));
}

TEST_CASE("intro system at long horizon", "[lyapunov]") {
    const Trajectory tr = integrate(catalog("intro-regular"), 20000.0, 0.01, 1e-10, no_frames());
    const ExponentReport r = exponents(tr);
    CHECK(r.values[0] == Approx(1.0).margin(0.05));
    CHECK(r.values[1] == Approx(0.0).margin(0.05));
    CHECK(regularity_defect(tr) <= kRegularDefectTol);
}

TEST_CASE("regularity defect of t sin t", "[lyapunov]") {
    // exponent 1, liminf of (sin t - t cos t)/t is -1
    const Trajectory tr = integrate(System::diagonal({Expr::parse("t*sin(t)")}), 600.0, 0.01, 1e-10);
    CHECK(regularity_defect(tr) == Approx(2.0).margin(0.05));
    IntegrateOptions io;
    io.force_general = true;
    const Trajectory nd = integrate(System(2, {Expr(), Expr::parse("1"), Expr(), Expr()}), 100.0, 0.1, 1e-8, io);
    CHECK_THROWS_AS(regularity_defect(nd), InvalidArgument);
}

TEST_CASE("distinct exponent clustering", "[lyapunov]") {
    const auto a = distinct_exponents(std::vector<double>{1.0001, 0.9999, -1}, 0.01);
    REQUIRE(a.size() == 2);
    CHECK(a[0].value == Approx(1.0).margin(1e-12));
    CHECK(a[0].multiplicity == 2);
    CHECK(a[1].value == -1.0);
    CHECK(a[1].multiplicity == 1);
    const auto b = distinct_exponents(std::vector<double>{1, 0}, 0.01);
    REQUIRE(b.size() == 2);
    CHECK(b[0].value == 1.0);
    CHECK(b[1].value == 0.0);
    CHECK_THROWS_AS(distinct_exponents(std::vector<double>{1}, 0.0), InvalidArgument);
}

TEST_CASE("exponents need a long horizon", "[lyapunov]") {
    const Trajectory tr = integrate(catalog("const-diag", {1}), 50.0, 0.1, 1e-8);
    CHECK_THROWS_AS(exponents(tr), InvalidArgument);
}

TEST_CASE("shift moves every exponent by gamma", "[lyapunov][property]") {
    const System sys = catalog("example-2-3");
    const ExponentReport base = exponents(integrate(sys, 600.0, 0.01, 1e-10));
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> g(-5, 5);
    for (int rep = 0; rep < 20; ++rep) {
        const double gamma = g(rng);
        const ExponentReport r = exponents(integrate(shift(sys, gamma), 600.0, 0.01, 1e-10));
        // the tail max of (L - gamma t)/t is exactly the shifted tail max
        for (std::size_t i = 0; i < 2; ++i) CHECK(r.values[i] == Approx(base.values[i] - gamma).margin(1e-9));
    }
}

TEST_CASE("permuting diagonal entries permutes the estimates", "[lyapunov][property]") {
    const System a = System::diagonal({Expr::parse("3"), Expr::parse("t*sin(t)"), Expr::parse("-1 + cos(t)")});
    const System b = System::diagonal({Expr::parse("-1 + cos(t)"), Expr::parse("3"), Expr::parse("t*sin(t)")});
    const auto ra = exponents(integrate(a, 300.0, 0.01, 1e-10)).values;
    const auto rb = exponents(integrate(b, 300.0, 0.01, 1e-10)).values;
    CHECK(ra[0] == rb[1]);
    CHECK(ra[1] == rb[2]);
    CHECK(ra[2] == rb[0]);
}

TEST_CASE("rate CSV", "[lyapunov]") {
    const Trajectory tr = integrate(catalog("const-diag", {2}), 1.0, 0.5, 1e-10);
    std::ostringstream os;
    write_rate_csv(tr, os);
    CHECK(os.str().rfind("t,r1\n", 0) == 0);
}
