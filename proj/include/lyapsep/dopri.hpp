#pragma once

// Dormand-Prince 5(4) with the standard continuous extension, driving a caller-supplied
// step observer. The observer sees each accepted step (with dense output over it) and may
// rescale the state before the next step starts.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "lyapsep/errors.hpp"

namespace lyapsep {

struct StepControl {
    double rtol = 1e-10;
    double atol = 1e-10;
    double h_init = 1e-2;
    double h_max = 0.5;
    /// Error scale uses the size of the step increment instead of the state. Meant for
    /// pure quadratures whose state is reset to zero after every step.
    bool increment_scaled = false;
    std::size_t max_steps = 50'000'000;
};

struct IntegratorStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

namespace dopri {

inline constexpr std::array<double, 7> c{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr std::array<double, 7> b{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
// Difference between the 5th and embedded 4th order weights.
inline constexpr std::array<double, 7> e{71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200,
                                         22.0 / 525, -1.0 / 40};
// Continuous extension: y(t0 + x h) = y0 + h sum_i k_i (P[i][0] x + P[i][1] x^2 + P[i][2] x^3 + P[i][3] x^4).
inline constexpr std::array<std::array<double, 4>, 7> P{{
    {1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799},
    {0.0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072},
    {0.0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 701980252875.0 / 199316789632},
    {0.0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844},
    {0.0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423},
}};

}  // namespace dopri

/// One accepted step with its continuous extension.
class DenseStep {
public:
    DenseStep(double t0, double t1, const Eigen::VectorXd& y0, const std::array<Eigen::VectorXd, 7>& k)
        : t0_(t0), t1_(t1), h_(t1 - t0), y0_(y0), k_(k) {}

    double t_begin() const noexcept { return t0_; }
    double t_end() const noexcept { return t1_; }

    void eval(double t, Eigen::VectorXd& out) const {
        const double x = (t - t0_) / h_;
        const double x2 = x * x, x3 = x2 * x, x4 = x3 * x;
        out = y0_;
        for (std::size_t i = 0; i < 7; ++i) {
            const auto& p = dopri::P[i];
            const double w = p[0] * x + p[1] * x2 + p[2] * x3 + p[3] * x4;
            if (w != 0.0) out.noalias() += (h_ * w) * k_[i];
        }
    }

private:
    double t0_, t1_, h_;
    const Eigen::VectorXd& y0_;
    const std::array<Eigen::VectorXd, 7>& k_;
};

/// Integrates y' = rhs(t, y) from t0 to t1. `rhs(t, y, dy)` writes the derivative;
/// `on_step(const DenseStep&, Eigen::VectorXd& y_new)` returns true when it modified y_new.
template <class Rhs, class OnStep>
IntegratorStats integrate_dopri45(Rhs&& rhs, double t0, double t1, Eigen::VectorXd y, const StepControl& ctl,
                                  OnStep&& on_step) {
    using namespace dopri;
    IntegratorStats stats;
    const Eigen::Index dim = y.size();
    std::array<Eigen::VectorXd, 7> k;
    for (auto& ki : k) ki.resize(dim);
    Eigen::VectorXd tmp(dim), y_new(dim), err(dim);

    double t = t0;
    double h = std::min(ctl.h_init, t1 - t0);
    rhs(t, y, k[0]);
    ++stats.rhs_evals;

    while (t < t1) {
        if (stats.accepted + stats.rejected >= ctl.max_steps)
            throw NumericalError("integrator exceeded the step budget at t=" + std::to_string(t));
        const double remaining = t1 - t;
        bool last = false;
        if (h >= remaining * (1.0 - 1e-12)) {
            h = remaining;
            last = true;
        }
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw NumericalError("step size underflow at t=" + std::to_string(t));

        tmp = y + h * a21 * k[0];
        rhs(t + c[1] * h, tmp, k[1]);
        tmp = y + h * (a31 * k[0] + a32 * k[1]);
        rhs(t + c[2] * h, tmp, k[2]);
        tmp = y + h * (a41 * k[0] + a42 * k[1] + a43 * k[2]);
        rhs(t + c[3] * h, tmp, k[3]);
        tmp = y + h * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3]);
        rhs(t + c[4] * h, tmp, k[4]);
        tmp = y + h * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] + a65 * k[4]);
        rhs(t + h, tmp, k[5]);
        y_new = y + h * (b[0] * k[0] + b[2] * k[2] + b[3] * k[3] + b[4] * k[4] + b[5] * k[5]);
        const double t_new = last ? t1 : t + h;
        rhs(t_new, y_new, k[6]);
        stats.rhs_evals += 6;

        err = h * (e[0] * k[0] + e[2] * k[2] + e[3] * k[3] + e[4] * k[4] + e[5] * k[5] + e[6] * k[6]);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double scale_ref = ctl.increment_scaled ? std::abs(y_new[i] - y[i])
                                                          : std::max(std::abs(y[i]), std::abs(y_new[i]));
            const double sc = ctl.atol + ctl.rtol * scale_ref;
            const double r = err[i] / sc;
            acc += r * r;
        }
        const double err_norm = std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(dim, 1)));
        if (!std::isfinite(err_norm)) throw NumericalError("non-finite state at t=" + std::to_string(t));

        if (err_norm <= 1.0) {
            ++stats.accepted;
            const DenseStep step(t, t_new, y, k);
            const bool modified = on_step(step, y_new);
            t = t_new;
            y.swap(y_new);
            if (modified) {
                rhs(t, y, k[0]);
                ++stats.rhs_evals;
            } else {
                k[0].swap(k[6]);
            }
            const double factor = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
            h = std::min(h * factor, ctl.h_max);
        } else {
            ++stats.rejected;
            h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
        }
    }
    return stats;
}

}  // namespace lyapsep
