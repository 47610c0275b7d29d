#pragma once

// Fundamental matrix data on a uniform output grid.
//
// Phi(t_k) is stored factored as Psi_k * diag(exp(L_k)), where Psi_k has unit columns and
// L_k holds the column log-norms. Columns are renormalized after every accepted step, so
// nothing overflows however long the horizon. Diagonal systems skip the matrix ODE and
// integrate each diagonal entry as a scalar quadrature (Psi_k = I).

#include <Eigen/Dense>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <utility>
#include <vector>

#include "lyapsep/dopri.hpp"
#include "lyapsep/errors.hpp"
#include "lyapsep/system.hpp"

namespace lyapsep {

inline constexpr double kDefaultHorizon = 600.0;
inline constexpr double kDefaultStep = 0.01;
inline constexpr double kDefaultTol = 1e-10;
inline constexpr double kMaxGridPoints = 1e7;

/// Coordinate projection given by component indices (0-based).
using Block = std::vector<std::size_t>;

struct IntegrateOptions {
    /// Keep the unit-column frames Psi_k (needed for transition norms of non-diagonal systems).
    bool store_frames = true;
    /// Integrate the full matrix ODE even for diagonal systems.
    bool force_general = false;
    /// General path only: re-orthonormalize by QR instead of rescaling columns. L then holds the running
    /// sums of log|R_ii|, whose growth rates are the ordered exponents even when the columns collapse onto
    /// the dominant direction. Frames are not kept, so transition norms are unavailable.
    bool orthonormalize = false;
    double h_max = 0.5;
};

class Trajectory {
public:
    const System& system() const noexcept { return sys_; }
    std::size_t dim() const noexcept { return n_; }
    /// Number of grid intervals; grid points are 0..steps().
    std::size_t steps() const noexcept { return steps_; }
    double step() const noexcept { return h_; }
    double horizon() const noexcept { return T_; }
    double tol() const noexcept { return tol_; }
    double time(std::size_t k) const noexcept { return k == steps_ ? T_ : static_cast<double>(k) * h_; }
    /// True when Psi_k = I is exact (diagonal quadrature path).
    bool quadrature() const noexcept { return quadrature_; }
    /// Columns evolve independently: the system is diagonal or the data is a diagonal table.
    bool diagonal_flow() const noexcept { return quadrature_ || sys_.is_diagonal(); }
    bool has_frames() const noexcept { return quadrature_ || !frames_.empty(); }
    /// L holds QR log-diagonals rather than column log-norms.
    bool orthonormal() const noexcept { return orthonormal_; }
    const IntegratorStats& stats() const noexcept { return stats_; }

    double lognorm(std::size_t k, std::size_t i) const { return L_[k * n_ + i]; }

    /// Unit-column frame at grid point k.
    Eigen::MatrixXd frame(std::size_t k) const {
        const auto n = static_cast<Eigen::Index>(n_);
        if (quadrature_) return Eigen::MatrixXd::Identity(n, n);
        if (frames_.empty()) throw InvalidArgument("trajectory was integrated without frames");
        return Eigen::Map<const Eigen::MatrixXd>(frames_.data() + k * n_ * n_, n, n);
    }

    /// Grid index of time t; throws for off-grid times.
    std::size_t index_of(double t) const {
        if (!(t >= -1e-9 * h_) || t > T_ * (1.0 + 1e-12) + 1e-9 * h_)
            throw InvalidArgument("time " + std::to_string(t) + " outside [0, " + std::to_string(T_) + "]");
        const double r = t / h_;
        const double k = std::round(r);
        if (std::abs(r - k) > 1e-6) throw InvalidArgument("time " + std::to_string(t) + " is not a grid point");
        return std::min(static_cast<std::size_t>(k), steps_);
    }

    /// log |det Phi(t_k)|, from the column norms and the volume of the unit frame.
    double log_abs_det(std::size_t k) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < n_; ++i) acc += lognorm(k, i);
        if (quadrature_ || orthonormal_) return acc;
        return acc + std::log(std::abs(frame(k).partialPivLu().determinant()));
    }

    /// Tabulated log-norms of a diagonal flow (identity frames), e.g. recovered coefficients of a
    /// diagonalized system. `L` is row-major, (steps + 1) x sys.dim().
    static Trajectory diagonal_table(System sys, double T, std::size_t steps, double tol, std::vector<double> L) {
        if (steps < 1 || L.size() != (steps + 1) * sys.dim()) throw InvalidArgument("log-norm table has the wrong shape");
        Trajectory tr(std::move(sys));
        tr.steps_ = steps;
        tr.h_ = T / static_cast<double>(steps);
        tr.T_ = T;
        tr.tol_ = tol;
        tr.quadrature_ = true;
        tr.L_ = std::move(L);
        return tr;
    }

    friend Trajectory integrate(const System& sys, double T, double h, double tol, const IntegrateOptions& opts);

private:
    explicit Trajectory(System sys) : sys_(std::move(sys)), n_(sys_.dim()) {}

    System sys_;
    std::size_t n_;
    std::size_t steps_ = 0;
    double h_ = 0.0, T_ = 0.0, tol_ = 0.0;
    bool quadrature_ = false;
    bool orthonormal_ = false;
    std::vector<double> L_;
    std::vector<double> frames_;
    IntegratorStats stats_;
};

inline constexpr std::size_t kQuadratureLimit = 64;

/// Integrates the fundamental matrix with Phi(0) = I on [0, T], recording grid data every h.
inline Trajectory integrate(const System& sys, double T, double h, double tol, const IntegrateOptions& opts = {}) {
    if (!(T > 0.0) || !(h > 0.0) || !(tol > 0.0)) throw InvalidArgument("T, h and tol must be positive");
    if (T / h > kMaxGridPoints) throw InvalidArgument("T/h exceeds 1e7 grid points");
    Trajectory tr(sys);
    const std::size_t n = sys.dim();
    tr.steps_ = static_cast<std::size_t>(std::ceil(T / h - 1e-9));
    tr.h_ = T / static_cast<double>(tr.steps_);
    tr.T_ = T;
    tr.tol_ = tol;
    tr.L_.assign((tr.steps_ + 1) * n, 0.0);

    StepControl ctl;
    ctl.rtol = tol;
    ctl.atol = tol;
    ctl.h_max = opts.h_max;
    // the step sequence depends on tol only; the grid just samples the dense output
    ctl.h_init = std::min(0.01, opts.h_max);

    std::size_t next = 1;  // next grid point to fill
    Eigen::VectorXd dense;

    if (sys.is_diagonal() && !opts.force_general) {
        // Each grid interval gets its own adaptive Gauss-Kronrod integral (QAGS, so the sqrt-type
        // endpoint behaviour at t = 0 converges). The running sum is compensated.
        tr.quadrature_ = true;
        gsl_set_error_handler_off();
        std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> ws(
            gsl_integration_workspace_alloc(kQuadratureLimit), &gsl_integration_workspace_free);
        if (!ws) throw NumericalError("could not allocate the quadrature workspace");
        struct Coefficient {
            const System* sys;
            std::size_t i;
            std::size_t evals;
        } coef{&sys, 0, 0};
        gsl_function F;
        F.function = [](double t, void* p) {
            auto* c = static_cast<Coefficient*>(p);
            ++c->evals;
            return c->sys->diag_entry(c->i, t);
        };
        F.params = &coef;
        // error budget per interval: tol*h/100, so the sum over [0, T] stays below tol*T/100
        const double abs_tol = tol * tr.h_ / 100.0;
        for (std::size_t i = 0; i < n; ++i) {
            coef.i = i;
            double sum = 0.0, carry = 0.0;
            for (std::size_t k = 0; k < tr.steps_; ++k) {
                double piece = 0.0, err = 0.0;
                // a nonzero status only flags that roundoff limits the requested accuracy
                gsl_integration_qags(&F, tr.time(k), tr.time(k + 1), abs_tol, 1e-14, kQuadratureLimit, ws.get(), &piece, &err);
                if (!std::isfinite(piece))
                    throw NumericalError("coefficient integral is not finite near t=" + std::to_string(tr.time(k)));
                const double next_sum = sum + piece;
                carry += std::abs(sum) >= std::abs(piece) ? (sum - next_sum) + piece : (piece - next_sum) + sum;
                sum = next_sum;
                tr.L_[(k + 1) * n + i] = sum + carry;
            }
        }
        tr.stats_.accepted = tr.steps_;
        tr.stats_.rhs_evals = coef.evals;
        return tr;
    }

    const auto ni = static_cast<Eigen::Index>(n);
    tr.orthonormal_ = opts.orthonormalize;
    if (opts.store_frames && !opts.orthonormalize) {
        tr.frames_.assign((tr.steps_ + 1) * n * n, 0.0);
        Eigen::Map<Eigen::MatrixXd>(tr.frames_.data(), ni, ni).setIdentity();
    }
    std::vector<double> acc(n, 0.0);
    auto rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const Eigen::MatrixXd a = sys.matrix(t);
        Eigen::Map<Eigen::MatrixXd>(dy.data(), ni, ni).noalias() = a * Eigen::Map<const Eigen::MatrixXd>(y.data(), ni, ni);
    };
    auto record = [&](std::size_t k, const Eigen::VectorXd& y) {
        Eigen::Map<const Eigen::MatrixXd> Y(y.data(), ni, ni);
        double* row = tr.L_.data() + k * n;
        if (opts.orthonormalize) {
            const Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
            for (Eigen::Index j = 0; j < ni; ++j) {
                const double r = std::abs(qr.matrixQR()(j, j));
                if (!(r > 0.0) || !std::isfinite(r))
                    throw NumericalError("fundamental matrix lost rank at t=" + std::to_string(tr.time(k)));
                row[j] = acc[static_cast<std::size_t>(j)] + std::log(r);
            }
            return;
        }
        for (Eigen::Index j = 0; j < ni; ++j) {
            const double nrm = Y.col(j).norm();
            if (!(nrm > 0.0) || !std::isfinite(nrm))
                throw NumericalError("fundamental matrix column degenerated at t=" + std::to_string(tr.time(k)));
            row[j] = acc[static_cast<std::size_t>(j)] + std::log(nrm);
            if (!tr.frames_.empty())
                Eigen::Map<Eigen::MatrixXd>(tr.frames_.data() + k * n * n, ni, ni).col(j) = Y.col(j) / nrm;
        }
    };
    auto on_step = [&](const DenseStep& step, Eigen::VectorXd& y_new) {
        while (next <= tr.steps_ && tr.time(next) <= step.t_end()) {
            if (next == tr.steps_) {
                record(next, y_new);
            } else {
                step.eval(tr.time(next), dense);
                record(next, dense);
            }
            ++next;
        }
        Eigen::Map<Eigen::MatrixXd> Y(y_new.data(), ni, ni);
        if (opts.orthonormalize) {
            const Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
            const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
            Eigen::MatrixXd Q = qr.householderQ();
            for (Eigen::Index j = 0; j < ni; ++j) {
                // keep R_jj positive so Q stays close to the previous frame
                if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
                acc[static_cast<std::size_t>(j)] += std::log(std::abs(R(j, j)));
            }
            Y = Q;
            return true;
        }
        for (Eigen::Index j = 0; j < ni; ++j) {
            const double nrm = Y.col(j).norm();
            acc[static_cast<std::size_t>(j)] += std::log(nrm);
            Y.col(j) /= nrm;
        }
        return true;
    };
    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(ni * ni);
    Eigen::Map<Eigen::MatrixXd>(y0.data(), ni, ni).setIdentity();
    tr.stats_ = integrate_dopri45(rhs, 0.0, T, std::move(y0), ctl, on_step);
    if (next != tr.steps_ + 1) throw NumericalError("integration ended before the last grid point");
    return tr;
}

/// log of the spectral norm of Phi(t_k) P Phi(t_m)^{-1} for the coordinate projection P onto `block`.
/// Works for either time order. Empty blocks give -infinity.
inline double transition_lognorm_idx(const Trajectory& tr, std::size_t m, std::size_t k, const Block& block) {
    if (block.empty()) return -std::numeric_limits<double>::infinity();
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i : block) {
        if (i >= tr.dim()) throw InvalidArgument("block index out of range");
        top = std::max(top, tr.lognorm(k, i) - tr.lognorm(m, i));
    }
    if (tr.quadrature()) return top;

    const auto n = static_cast<Eigen::Index>(tr.dim());
    const Eigen::MatrixXd psi_k = tr.frame(k);
    const Eigen::MatrixXd psi_m = tr.frame(m);
    Eigen::MatrixXd mid = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i : block) {
        const auto ii = static_cast<Eigen::Index>(i);
        mid(ii, ii) = std::exp(tr.lognorm(k, i) - tr.lognorm(m, i) - top);
    }
    const Eigen::MatrixXd inv = psi_m.partialPivLu().inverse();
    const Eigen::MatrixXd M = psi_k * mid * inv;
    const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
    return top + std::log(s);
}

inline double transition_lognorm(const Trajectory& tr, double s, double t, const Block& block) {
    return transition_lognorm_idx(tr, tr.index_of(s), tr.index_of(t), block);
}

inline double shifted_transition_lognorm(const Trajectory& tr, double s, double t, const Block& block, double gamma) {
    return transition_lognorm(tr, s, t, block) - gamma * (t - s);
}

inline Block full_block(std::size_t n) {
    Block b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = i;
    return b;
}

// ---------------------------------------------------------------------------
// Pair grid

inline constexpr std::size_t kDefaultMaxPairs = 20000;

/// Grid-index pairs (s, t) with s <= t.
struct PairGrid {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    double h = 0.0;
    std::size_t steps = 0;
    std::size_t max_pairs = 0;
    std::size_t anchors = 0, bases = 0, gaps = 0;

    double s(std::size_t p) const { return static_cast<double>(pairs[p].first) * h; }
    double t(std::size_t p) const { return static_cast<double>(pairs[p].second) * h; }
    std::size_t size() const noexcept { return pairs.size(); }
};

/// Deterministic stratified pairs on an N-step grid:
///   anchors (0, round(j N / A)) for j = 1..A with A = max_pairs / 4,
///   bases round(i N / nb) for i < nb, combined with gaps max(1, round(N^(j/(ng-1)))) for j < ng,
///   where ng = floor(sqrt(R)), nb = R / ng and R = max_pairs - A.
/// Pairs running past N are dropped; the result is sorted and deduplicated.
inline PairGrid pair_grid(std::size_t steps, double h, std::size_t max_pairs = kDefaultMaxPairs) {
    if (max_pairs < 100) throw InvalidArgument("max_pairs must be at least 100");
    if (steps < 1) throw InvalidArgument("pair grid needs at least one step");
    PairGrid g;
    g.h = h;
    g.steps = steps;
    g.max_pairs = max_pairs;
    const double N = static_cast<double>(steps);
    g.anchors = max_pairs / 4;
    const std::size_t rest = max_pairs - g.anchors;
    g.gaps = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(rest))));
    g.bases = rest / g.gaps;

    auto& out = g.pairs;
    out.reserve(max_pairs);
    for (std::size_t j = 1; j <= g.anchors; ++j)
        out.emplace_back(0, static_cast<std::size_t>(std::llround(static_cast<double>(j) * N / static_cast<double>(g.anchors))));
    for (std::size_t i = 0; i < g.bases; ++i) {
        const auto s = static_cast<std::size_t>(std::llround(static_cast<double>(i) * N / static_cast<double>(g.bases)));
        for (std::size_t j = 0; j < g.gaps; ++j) {
            const double e = static_cast<double>(j) / static_cast<double>(g.gaps - 1);
            const auto gap = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::pow(N, e))));
            if (s + gap <= steps) out.emplace_back(s, s + gap);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return g;
}

inline PairGrid pair_grid(const Trajectory& tr, std::size_t max_pairs = kDefaultMaxPairs) {
    return pair_grid(tr.steps(), tr.step(), max_pairs);
}

// ---------------------------------------------------------------------------
// CSV

/// Writes "t,L1,...,Ln" rows for every `stride`-th grid point (the last point is always written).
inline void write_lognorm_csv(const Trajectory& tr, std::ostream& os, std::size_t stride = 1) {
    stride = std::max<std::size_t>(stride, 1);
    os << "t";
    for (std::size_t i = 0; i < tr.dim(); ++i) os << ",L" << (i + 1);
    os << '\n' << std::setprecision(17);
    for (std::size_t k = 0; k <= tr.steps(); ++k) {
        if (k % stride != 0 && k != tr.steps()) continue;
        os << tr.time(k);
        for (std::size_t i = 0; i < tr.dim(); ++i) os << ',' << tr.lognorm(k, i);
        os << '\n';
    }
}

}  // namespace lyapsep
