#pragma once

// Diagonalizing change of variables built from normalized fundamental-matrix columns:
// T^-1(t) = [Phi_1/|Phi_1|, ..., Phi_n/|Phi_n|], so T Phi = diag(|Phi_1|, ..., |Phi_n|) and the
// transformed system is diagonal with a_i = <psi_i, A psi_i>.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "lyapsep/dopri.hpp"
#include "lyapsep/errors.hpp"
#include "lyapsep/propagator.hpp"

namespace lyapsep {

inline constexpr double kGramDegeneracy = 1e-6;
inline constexpr double kBoundedThreshold = 1e6;

struct TransformPoint {
    double t = 0.0;
    double norm_T = 0.0, norm_T_inv = 0.0, norm_T_dot = 0.0;
    double gram = 0.0;
    std::vector<double> coefficients;
};

struct TransformDiagnostics {
    double sup_T = 0.0, sup_T_inv = 0.0, sup_T_dot = 0.0;
    double gram_min = 1.0;
    double gram_min_t = 0.0;
    bool bounded = false;
    double threshold = kBoundedThreshold;
    std::size_t stride = 1;
    std::vector<std::string> warnings;
};

/// Sampled T^-1(t_k) (unit columns), every `stride`-th grid point.
inline std::vector<Eigen::MatrixXd> build_transform(const Trajectory& tr, std::size_t stride = 1) {
    stride = std::max<std::size_t>(stride, 1);
    std::vector<Eigen::MatrixXd> out;
    for (std::size_t k = 0; k <= tr.steps(); k += stride) out.push_back(tr.frame(k));
    return out;
}

/// Quantities of the transformation at grid point k.
inline TransformPoint transform_point(const Trajectory& tr, std::size_t k) {
    TransformPoint p;
    p.t = tr.time(k);
    const Eigen::MatrixXd psi = tr.frame(k);
    const Eigen::MatrixXd A = tr.system().matrix(p.t);
    const Eigen::MatrixXd Apsi = A * psi;
    const auto n = psi.cols();
    Eigen::MatrixXd psi_dot = Apsi;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = psi.col(i).dot(Apsi.col(i));
        p.coefficients.push_back(a);
        psi_dot.col(i) -= a * psi.col(i);
    }
    const auto lu = psi.fullPivLu();
    if (!lu.isInvertible()) {
        p.norm_T = p.norm_T_dot = std::numeric_limits<double>::infinity();
    } else {
        const Eigen::MatrixXd T = lu.inverse();
        const Eigen::MatrixXd T_dot = -T * psi_dot * T;
        p.norm_T = Eigen::JacobiSVD<Eigen::MatrixXd>(T).singularValues()(0);
        p.norm_T_dot = n > 0 ? Eigen::JacobiSVD<Eigen::MatrixXd>(T_dot).singularValues()(0) : 0.0;
    }
    p.norm_T_inv = Eigen::JacobiSVD<Eigen::MatrixXd>(psi).singularValues()(0);
    const double det = lu.determinant();
    p.gram = std::clamp(det * det, 0.0, 1.0);
    return p;
}

/// Grid sups of |T|, |T^-1|, |T'| and the minimum normalized Gram determinant.
inline TransformDiagnostics diagnostics(const Trajectory& tr, std::size_t stride = 1,
                                        double threshold = kBoundedThreshold) {
    if (!tr.has_frames()) throw InvalidArgument("transform diagnostics need a trajectory with frames");
    TransformDiagnostics d;
    d.stride = std::max<std::size_t>(stride, 1);
    d.threshold = threshold;
    for (std::size_t k = 0; k <= tr.steps(); k += d.stride) {
        const TransformPoint p = transform_point(tr, k);
        d.sup_T = std::max(d.sup_T, p.norm_T);
        d.sup_T_inv = std::max(d.sup_T_inv, p.norm_T_inv);
        d.sup_T_dot = std::max(d.sup_T_dot, p.norm_T_dot);
        if (p.gram < d.gram_min) {
            d.gram_min = p.gram;
            d.gram_min_t = p.t;
        }
    }
    d.bounded = std::isfinite(d.sup_T) && std::isfinite(d.sup_T_dot) && d.sup_T < threshold &&
                d.sup_T_inv < threshold && d.sup_T_dot < threshold;
    if (d.gram_min < kGramDegeneracy)
        d.warnings.push_back("columns nearly collinear: gram_min " + std::to_string(d.gram_min) + " at t=" +
                             std::to_string(d.gram_min_t));
    return d;
}

/// Log-norm table of the diagonalized system, obtained by integrating the recovered coefficients
/// <y_i, A y_i> / |y_i|^2 alongside the columns.
inline Trajectory recovered_diagonal(const Trajectory& tr) {
    const System& sys = tr.system();
    const std::size_t n = sys.dim();
    const auto ni = static_cast<Eigen::Index>(n);
    const Eigen::Index nn = ni * ni;
    std::vector<double> L((tr.steps() + 1) * n, 0.0);
    std::vector<double> acc(n, 0.0);

    StepControl ctl;
    ctl.rtol = ctl.atol = tr.tol();
    ctl.h_init = tr.step();
    auto rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const Eigen::MatrixXd A = sys.matrix(t);
        Eigen::Map<const Eigen::MatrixXd> Y(y.data(), ni, ni);
        Eigen::Map<Eigen::MatrixXd> dY(dy.data(), ni, ni);
        dY.noalias() = A * Y;
        for (Eigen::Index i = 0; i < ni; ++i) dy[nn + i] = Y.col(i).dot(dY.col(i)) / Y.col(i).squaredNorm();
    };
    std::size_t next = 1;
    Eigen::VectorXd dense;
    auto on_step = [&](const DenseStep& step, Eigen::VectorXd& y_new) {
        while (next <= tr.steps() && tr.time(next) <= step.t_end()) {
            const Eigen::VectorXd* src = &y_new;
            if (next != tr.steps()) {
                step.eval(tr.time(next), dense);
                src = &dense;
            }
            for (std::size_t i = 0; i < n; ++i) L[next * n + i] = acc[i] + (*src)[nn + static_cast<Eigen::Index>(i)];
            ++next;
        }
        Eigen::Map<Eigen::MatrixXd> Y(y_new.data(), ni, ni);
        for (Eigen::Index i = 0; i < ni; ++i) {
            Y.col(i).normalize();
            acc[static_cast<std::size_t>(i)] += y_new[nn + i];
            y_new[nn + i] = 0.0;
        }
        return true;
    };
    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(nn + ni);
    Eigen::Map<Eigen::MatrixXd>(y0.data(), ni, ni).setIdentity();
    integrate_dopri45(rhs, 0.0, tr.horizon(), std::move(y0), ctl, on_step);
    if (next != tr.steps() + 1) throw NumericalError("integration ended before the last grid point");
    return Trajectory::diagonal_table(sys, tr.horizon(), tr.steps(), tr.tol(), std::move(L));
}

/// Writes "t,norm_T,norm_T_inv,norm_T_dot,gram,a1..an" rows.
inline void write_transform_csv(const Trajectory& tr, std::ostream& os, std::size_t stride = 1) {
    stride = std::max<std::size_t>(stride, 1);
    os << "t,norm_T,norm_T_inv,norm_T_dot,gram";
    for (std::size_t i = 0; i < tr.dim(); ++i) os << ",a" << (i + 1);
    os << '\n' << std::setprecision(17);
    for (std::size_t k = 0; k <= tr.steps(); k += stride) {
        const TransformPoint p = transform_point(tr, k);
        os << p.t << ',' << p.norm_T << ',' << p.norm_T_inv << ',' << p.norm_T_dot << ',' << p.gram;
        for (double a : p.coefficients) os << ',' << a;
        os << '\n';
    }
}

}  // namespace lyapsep
