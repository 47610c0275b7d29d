#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "lyapsep/config.hpp"
#include "lyapsep/separation.hpp"
#include "lyapsep/transform.hpp"
#include "oracles.hpp"

using namespace lyapsep;
using Catch::Approx;

namespace {

Trajectory general(const System& sys, double T, double h = 0.01, double tol = 1e-10) {
    IntegrateOptions io;
    io.force_general = true;
    return integrate(sys, T, h, tol, io);
}

System rotation() { return System(2, {Expr(), Expr::parse("1"), Expr::parse("-1"), Expr()}); }

}  // namespace

TEST_CASE("diagonal systems have the identity transform", "[transform]") {
    for (const Trajectory& tr : {integrate(catalog("example-3-2"), 50.0, 0.01, 1e-10), general(catalog("example-3-2"), 50.0)}) {
        for (const auto& m : build_transform(tr, 50)) CHECK((m - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
        const TransformDiagnostics d = diagnostics(tr, 5);
        CHECK(d.sup_T == Approx(1.0).margin(1e-12));
        CHECK(d.sup_T_inv == Approx(1.0).margin(1e-12));
        CHECK(d.sup_T_dot == Approx(0.0).margin(1e-12));
        CHECK(d.gram_min == Approx(1.0).margin(1e-12));
        CHECK(d.bounded);
        CHECK(d.warnings.empty());
    }
}

TEST_CASE("rotation system", "[transform]") {
    const Trajectory tr = general(rotation(), 20.0);
    const auto frames = build_transform(tr, 100);
    for (std::size_t j = 0; j < frames.size(); ++j) {
        const double t = tr.time(j * 100);
        Eigen::Matrix2d R;
        R << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
        CHECK((frames[j] - R).cwiseAbs().maxCoeff() <= 1e-8);
    }
    const TransformDiagnostics d = diagnostics(tr);
    CHECK(d.gram_min == Approx(1.0).margin(1e-9));
    CHECK(d.sup_T_dot == Approx(1.0).margin(1e-6));
    CHECK(d.bounded);
}

TEST_CASE("frames have unit columns and rebuild the fundamental matrix", "[transform][property]") {
    const System sys(2, {Expr::parse("-1 + sin(t)"), Expr::parse("2"), Expr::parse("0.5*cos(t)"), Expr::parse("0.3")});
    const Trajectory tr = general(sys, 10.0);
    for (std::size_t k = 0; k <= tr.steps(); k += 37) {
        const Eigen::MatrixXd psi = tr.frame(k);
        for (Eigen::Index i = 0; i < 2; ++i) CHECK(std::abs(psi.col(i).norm() - 1.0) <= 1e-12);
    }
    // Phi(t) = Psi(t) diag(exp L(t)) against a fixed-step reference; compared column by column since
    // inverting Psi amplifies integrator error once the columns close up
    auto A = [&](double t) { return sys.matrix(t); };
    for (std::size_t k : {250u, 600u, 1000u}) {
        Eigen::VectorXd ls;
        const Eigen::MatrixXd Y = oracle::rk4(A, Eigen::MatrixXd::Identity(2, 2), 0.0, tr.time(k), 1e-3, &ls);
        const Eigen::MatrixXd psi = tr.frame(k);
        for (Eigen::Index i = 0; i < 2; ++i) {
            const double scale = std::exp(ls[i] - tr.lognorm(k, static_cast<std::size_t>(i)));
            CHECK((Y.col(i) * scale - psi.col(i)).norm() <= 1e-8);
        }
    }
}

TEST_CASE("recovered coefficients of an already diagonal system", "[transform]") {
    const Trajectory tr = general(catalog("intro-regular"), 50.0);
    double worst = 0.0;
    for (std::size_t k = 0; k <= tr.steps(); k += 7) {
        const TransformPoint p = transform_point(tr, k);
        const double want = 1.0 + std::numbers::pi / 2 * std::sin(std::numbers::pi * std::sqrt(p.t));
        worst = std::max({worst, std::abs(p.coefficients[0] - want), std::abs(p.coefficients[1])});
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("certificates carry over to the recovered diagonal system", "[transform][property]") {
    const System sys(2, {Expr::parse("-1 + sin(t)"), Expr::parse("0.3"), Expr(), Expr::parse("1 + 0.5*cos(t)")});
    const Trajectory tr = general(sys, 200.0);
    const TransformDiagnostics d = diagnostics(tr, 10);
    REQUIRE(d.gram_min >= 0.1);
    const Trajectory diag = recovered_diagonal(tr);
    CHECK(diag.quadrature());
    const PairGrid grid = pair_grid(tr);
    SeparationOptions opts;
    opts.order = {0, 1};
    const SeparationCertificate col = column_certificate(tr, 1, grid, opts);
    const SeparationCertificate coef = coefficient_certificate(diag, 1, grid, opts);
    REQUIRE(col.fit.feasible);
    REQUIRE(coef.fit.feasible);
    CHECK(std::abs(col.fit.slope_gap - coef.fit.slope_gap) <= 1e-6);
    CHECK(std::abs(col.fit.nonuniform_slope - coef.fit.nonuniform_slope) <= 1e-6);
}

TEST_CASE("collinear columns raise a warning", "[transform]") {
    // Jordan block: columns (1, 0) and (t, 1) close up like 1 / (1 + t^2)
    const Trajectory tr = general(System(2, {Expr::parse("1"), Expr::parse("1"), Expr(), Expr::parse("1")}), 2000.0, 0.5, 1e-9);
    const TransformDiagnostics d = diagnostics(tr);
    CHECK(d.gram_min == Approx(1.0 / (1.0 + 2000.0 * 2000.0)).epsilon(1e-3));
    CHECK(d.gram_min_t == 2000.0);
    CHECK_FALSE(d.warnings.empty());
    CHECK(d.gram_min >= 0.0);
    CHECK(d.gram_min <= 1.0);
}

TEST_CASE("transform preconditions and CSV", "[transform]") {
    IntegrateOptions io;
    io.force_general = true;
    io.store_frames = false;
    const Trajectory bare = integrate(rotation(), 1.0, 0.1, 1e-8, io);
    CHECK_THROWS_AS(diagnostics(bare), InvalidArgument);
    const Trajectory tr = general(rotation(), 1.0, 0.5);
    std::ostringstream os;
    write_transform_csv(tr, os);
    CHECK(os.str().rfind("t,norm_T,norm_T_inv,norm_T_dot,gram,a1,a2\n", 0) == 0);
}
