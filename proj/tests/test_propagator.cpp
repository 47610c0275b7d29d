#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "lyapsep/config.hpp"
#include "lyapsep/propagator.hpp"
#include "oracles.hpp"

using namespace lyapsep;
using Catch::Approx;
constexpr double pi = std::numbers::pi;

TEST_CASE("constant diagonal log-norms", "[propagator]") {
    const Trajectory tr = integrate(catalog("const-diag", {1, -1}), 1.0, 1e-3, 1e-10);
    CHECK(tr.steps() == 1000);
    CHECK(tr.lognorm(0, 0) == 0.0);
    CHECK(tr.lognorm(1000, 0) == Approx(1.0).margin(1e-9));
    CHECK(tr.lognorm(1000, 1) == Approx(-1.0).margin(1e-9));
}

TEST_CASE("closed-form log-norms on the diagonal path", "[propagator]") {
    const Trajectory tr = integrate(catalog("example-3-2"), pi, pi / 100, 1e-10);
    CHECK(tr.time(100) == Approx(pi).epsilon(1e-15));
    CHECK(tr.lognorm(100, 0) == Approx(0.0).margin(1e-8));
    const Trajectory t2 = integrate(catalog("example-2-3"), 10.0, 0.01, 1e-10);
    CHECK(t2.lognorm(1000, 1) == Approx(oracle::int_tsint(10.0)).margin(1e-8));
    // dense output between accepted steps, at every grid point
    double worst = 0.0;
    for (std::size_t k = 0; k <= t2.steps(); ++k)
        worst = std::max(worst, std::abs(t2.lognorm(k, 1) - oracle::int_tsint(t2.time(k))));
    CHECK(worst < 1e-8);
}

TEST_CASE("matrix path agrees with the quadrature path", "[propagator]") {
    IntegrateOptions io;
    io.force_general = true;
    const Trajectory g = integrate(catalog("example-3-2"), 60.0, 0.01, 1e-11, io);
    const Trajectory q = integrate(catalog("example-3-2"), 60.0, 0.01, 1e-11);
    CHECK_FALSE(g.quadrature());
    CHECK(q.quadrature());
    double worst = 0.0;
    for (std::size_t k = 0; k <= g.steps(); k += 7)
        for (std::size_t i = 0; i < 2; ++i) worst = std::max(worst, std::abs(g.lognorm(k, i) - q.lognorm(k, i)));
    CHECK(worst < 1e-7);
    CHECK(g.lognorm(g.steps(), 0) == Approx(oracle::ex32_L1(60.0)).margin(1e-7));
}

TEST_CASE("non-diagonal transition norms match a fixed-step RK4 oracle", "[propagator]") {
    const System sys(2, {Expr::parse("-1 + sin(t)"), Expr::parse("2"), Expr::parse("0.5*cos(t)"), Expr::parse("0.3")});
    const Trajectory tr = integrate(sys, 20.0, 0.01, 1e-11);
    auto A = [&](double t) { return sys.matrix(t); };
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> pick(0, tr.steps());
    for (int rep = 0; rep < 15; ++rep) {
        std::size_t m = pick(rng), k = pick(rng);
        if (m > k) std::swap(m, k);
        // Phi(t) Phi(s)^-1 is the propagator from s to t started at the identity.
        Eigen::VectorXd ls;
        const Eigen::MatrixXd Y = oracle::rk4(A, Eigen::MatrixXd::Identity(2, 2), tr.time(m), tr.time(k), 1e-3, &ls);
        Eigen::MatrixXd M = Y;
        double shift = ls.maxCoeff();
        for (int c = 0; c < 2; ++c) M.col(c) *= std::exp(ls[c] - shift);
        const double want = shift + std::log(Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0));
        CHECK(transition_lognorm_idx(tr, m, k, {0, 1}) == Approx(want).margin(1e-7));
        // backward direction is the inverse propagator
        const Eigen::MatrixXd P = Y * ls.array().exp().matrix().asDiagonal();
        const double back = std::log(Eigen::JacobiSVD<Eigen::MatrixXd>(P.inverse()).singularValues()(0));
        CHECK(transition_lognorm_idx(tr, k, m, {0, 1}) == Approx(back).margin(1e-7));
    }
}

TEST_CASE("transition log-norm examples", "[propagator]") {
    const Trajectory tr = integrate(catalog("const-diag", {-1, 1}), 2.0, 1e-3, 1e-10);
    CHECK(transition_lognorm(tr, 0.0, 1.0, {0}) == Approx(-1.0).margin(1e-9));
    CHECK(transition_lognorm(tr, 1.0, 0.0, {1}) == Approx(-1.0).margin(1e-9));
    CHECK(std::isinf(transition_lognorm(tr, 0.0, 1.0, {})));
    const Trajectory e = integrate(catalog("example-3-2"), pi, pi / 100, 1e-10);
    CHECK(transition_lognorm(e, 0.0, pi, {0}) == Approx(0.0).margin(1e-8));
    CHECK(shifted_transition_lognorm(e, 0.0, pi, {0}, 5.0) == Approx(-5 * pi).margin(1e-7));
    const Trajectory c = integrate(catalog("const-diag", {1, -1}), 2.0, 1e-3, 1e-10);
    CHECK(shifted_transition_lognorm(c, 0.0, 2.0, {1}, 1.0) == Approx(-4.0).margin(1e-9));
    CHECK_THROWS_AS(transition_lognorm(c, 0.0005, 1.0, {0}), InvalidArgument);
}

TEST_CASE("shift identity against re-integration of the shifted system", "[propagator][property]") {
    const System sys = catalog("example-3-2");
    const Trajectory tr = integrate(sys, 100.0, 0.01, 1e-12);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> g(-5, 5);
    std::uniform_int_distribution<std::size_t> pick(0, tr.steps());
    for (int rep = 0; rep < 100; ++rep) {
        const double gamma = g(rng);
        std::size_t m = pick(rng), k = pick(rng);
        if (m > k) std::swap(m, k);
        const std::size_t i = rep % 2;
        const double s = tr.time(m), t = tr.time(k);
        const double a = shifted_transition_lognorm(tr, s, t, {i}, gamma);
        CHECK(a == transition_lognorm(tr, s, t, {i}) - gamma * (t - s));
        const Trajectory direct = integrate(shift(sys, gamma), 100.0, 0.01, 1e-12);
        CHECK(std::abs(a - transition_lognorm(direct, s, t, {i})) <= 1e-8);
        const double exact = (i == 0 ? oracle::ex32_L1(t) - oracle::ex32_L1(s) : oracle::ex32_L2(t) - oracle::ex32_L2(s)) -
                             gamma * (t - s);
        CHECK(std::abs(a - exact) <= 1e-8);
    }
}

TEST_CASE("cocycle consistency on diagonal systems", "[propagator][property]") {
    const Trajectory tr = integrate(catalog("example-2-3"), 50.0, 0.01, 1e-10);
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::size_t> pick(0, tr.steps());
    for (int rep = 0; rep < 100; ++rep) {
        std::size_t idx[3] = {pick(rng), pick(rng), pick(rng)};
        std::sort(idx, idx + 3);
        for (std::size_t i = 0; i < 2; ++i) {
            const double whole = transition_lognorm_idx(tr, idx[0], idx[2], {i});
            const double parts = transition_lognorm_idx(tr, idx[0], idx[1], {i}) + transition_lognorm_idx(tr, idx[1], idx[2], {i});
            CHECK(std::abs(whole - parts) <= 2 * tr.tol());
        }
    }
}

TEST_CASE("halving the grid step barely moves the log-norms", "[propagator][property]") {
    const Trajectory a = integrate(catalog("example-2-3"), 40.0, 0.02, 1e-10);
    const Trajectory b = integrate(catalog("example-2-3"), 40.0, 0.01, 1e-10);
    double worst = 0.0;
    for (std::size_t k = 0; k <= a.steps(); ++k)
        for (std::size_t i = 0; i < 2; ++i) worst = std::max(worst, std::abs(a.lognorm(k, i) - b.lognorm(2 * k, i)));
    CHECK(worst < 10 * 1e-10);
}

TEST_CASE("overflow-safe accumulation", "[propagator]") {
    IntegrateOptions io;
    io.force_general = true;
    const Trajectory tr = integrate(catalog("const-diag", {5, -5}), 400.0, 0.1, 1e-9, io);
    CHECK(tr.lognorm(tr.steps(), 0) == Approx(2000.0).epsilon(1e-9));
    CHECK(tr.lognorm(tr.steps(), 1) == Approx(-2000.0).epsilon(1e-9));
    CHECK(std::isfinite(transition_lognorm_idx(tr, 0, tr.steps(), {0, 1})));
    CHECK(transition_lognorm_idx(tr, tr.steps(), 0, {0, 1}) == Approx(2000.0).epsilon(1e-9));
}

TEST_CASE("integrate preconditions", "[propagator]") {
    const System s = catalog("const-diag", {1});
    CHECK_THROWS_AS(integrate(s, 1e8, 1.0 / 1024, 1e-8), InvalidArgument);
    CHECK_THROWS_AS(integrate(s, -1, 0.1, 1e-8), InvalidArgument);
    const Trajectory tr = integrate(s, 1.0, 0.3, 1e-8);
    CHECK(tr.steps() == 4);
    CHECK(tr.time(tr.steps()) == 1.0);
}

TEST_CASE("pair grid matches the documented construction", "[propagator]") {
    const PairGrid g = pair_grid(1000, 0.01, 100);
    std::ifstream in(LYAPSEP_TEST_DIR "/golden/pair_grid_T10_h0.01_max100.txt");
    REQUIRE(in);
    std::vector<std::pair<std::size_t, std::size_t>> want;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::size_t a, b;
        ls >> a >> b;
        want.emplace_back(a, b);
    }
    CHECK(g.pairs == want);
    CHECK(g.size() <= 100);
}

TEST_CASE("pair grid properties", "[propagator][property]") {
    for (std::size_t steps : {10u, 1000u, 60000u})
        for (std::size_t mp : {100u, 1000u, 20000u}) {
            const PairGrid g = pair_grid(steps, 0.01, mp);
            CHECK(g.size() <= mp);
            bool has_full = false;
            for (const auto& [s, t] : g.pairs) {
                CHECK(s <= t);
                CHECK(t <= steps);
                has_full = has_full || (s == 0 && t == steps);
            }
            CHECK(has_full);
        }
    CHECK_THROWS_AS(pair_grid(100, 0.01, 99), InvalidArgument);
}

TEST_CASE("log-norm CSV layout", "[propagator]") {
    const Trajectory tr = integrate(catalog("const-diag", {1, -1}), 1.0, 0.25, 1e-10);
    std::ostringstream os;
    write_lognorm_csv(tr, os);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "t,L1,L2");
    std::size_t rows = 0;
    for (std::string l; std::getline(is, l);) ++rows;
    CHECK(rows == 5);
}
