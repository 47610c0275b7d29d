#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lyapsep/config.hpp"
#include "lyapsep/errors.hpp"
#include "lyapsep/expr.hpp"
#include "lyapsep/lyapunov.hpp"
#include "lyapsep/propagator.hpp"
#include "lyapsep/system.hpp"

namespace lyapsep {

/// Declared bound |B(t)| <= delta * exp(-beta t).
struct Decay {
    double delta = 0.0;
    double beta = 0.0;
};

/// Perturbation matrix B(t). A declared decay is checked on the probe grid at construction.
class Perturbation {
public:
    Perturbation(std::size_t n, std::vector<Expr> entries, std::optional<Decay> decay = std::nullopt,
                 double probe_horizon = kDefaultProbeHorizon)
        : n_(n), entries_(std::move(entries)), decay_(decay) {
        if (entries_.size() != n_ * n_) throw ConfigError("perturbation needs n*n entries");
        if (decay_ && (!(decay_->delta > 0.0) || decay_->beta < 0.0))
            throw ConfigError("decay needs delta > 0 and beta >= 0");
        if (!(probe_horizon > 0.0)) return;
        const auto ni = static_cast<Eigen::Index>(n_);
        for (std::size_t k = 0; k < kProbePoints; ++k) {
            const double t = probe_horizon * static_cast<double>(k) / static_cast<double>(kProbePoints - 1);
            Eigen::MatrixXd b(ni, ni);
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = 0; j < n_; ++j) {
                    try {
                        b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = entries_[i * n_ + j].eval(t);
                    } catch (const DomainError& e) {
                        throw ConfigError("perturbation entry B[" + std::to_string(i + 1) + "][" +
                                          std::to_string(j + 1) + "] fails at t=" + std::to_string(t) + ": " + e.what());
                    }
                }
            const double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(b).singularValues()(0);
            if (!std::isfinite(norm)) throw ConfigError("perturbation is not finite at t=" + std::to_string(t));
            // log form: exp(beta t) overflows long before |B| underflows; subnormal norms carry no precision
            if (norm >= std::numeric_limits<double>::min())
                measured_sup_ = std::max(measured_sup_, decay_ ? std::exp(std::log(norm) + decay_->beta * t) : norm);
        }
        if (decay_ && measured_sup_ > decay_->delta * (1.0 + 1e-6))
            throw ConfigError("perturbation violates its declared decay: sup |B(t)| e^(beta t) = " +
                              std::to_string(measured_sup_) + " > delta = " + std::to_string(decay_->delta));
    }

    static Perturbation zero(std::size_t n) { return Perturbation(n, std::vector<Expr>(n * n), std::nullopt, 0.0); }

    std::size_t dim() const noexcept { return n_; }
    const std::vector<Expr>& entries() const noexcept { return entries_; }
    const std::optional<Decay>& decay() const noexcept { return decay_; }
    /// Sup over the probe grid of |B(t)| (times exp(beta t) when a decay is declared).
    double measured_sup() const noexcept { return measured_sup_; }
    bool is_zero() const {
        return std::all_of(entries_.begin(), entries_.end(), [](const Expr& e) { return e.is_zero_literal(); });
    }

    /// "zero", "exponentially decaying" or "bounded".
    std::string label() const {
        if (is_zero()) return "zero";
        if (decay_ && decay_->beta > 0.0) return "exponentially decaying";
        return "bounded";
    }

private:
    std::size_t n_;
    std::vector<Expr> entries_;
    std::optional<Decay> decay_;
    double measured_sup_ = 0.0;
};

/// Perturbation from the [perturbation] section of a configuration.
inline Perturbation load_perturbation(const SystemConfig& cfg, double probe_horizon = kDefaultProbeHorizon) {
    if (!cfg.b) throw ConfigError("configuration has no perturbation entries");
    std::optional<Decay> decay;
    if (cfg.decay_delta) decay = Decay{*cfg.decay_delta, cfg.decay_beta.value_or(0.0)};
    else if (cfg.decay_beta) throw ConfigError("decay_beta given without decay_delta");
    return Perturbation(cfg.n, *cfg.b, decay, probe_horizon);
}

/// A(t) + B(t), entrywise; zero entries on either side are skipped so diagonal structure survives.
inline System perturbed_system(const System& sys, const Perturbation& p) {
    if (sys.dim() != p.dim()) throw ConfigError("dimension mismatch between system and perturbation");
    std::vector<Expr> entries = sys.entries();
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const Expr& b = p.entries()[k];
        if (b.is_zero_literal()) continue;
        entries[k] = entries[k].is_zero_literal() ? b : entries[k] + b;
    }
    return System(sys.dim(), std::move(entries), sys.name() + " + B", 0.0);
}

struct ExperimentSettings {
    double T = kDefaultHorizon;
    double h = kDefaultStep;
    double tol = kDefaultTol;
    double tail_fraction = kDefaultTailFraction;
};

struct ShiftReport {
    std::vector<double> unperturbed;  // descending
    std::vector<double> perturbed;    // descending
    std::vector<double> shifts;
    double max_shift = 0.0;
    double epsilon = 0.0;
    bool stable = false;
    std::string perturbation_class;
    bool unperturbed_converged = false, perturbed_converged = false;
};

/// Integrates sys and sys + B, estimates both exponent sets and pairs them in descending order.
inline ShiftReport stability_experiment(const System& sys, const Perturbation& p, double epsilon,
                                        const ExperimentSettings& cfg = {}) {
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    // column norms of a coupled system all pick up the top exponent; QR keeps the ordered ones
    IntegrateOptions io;
    io.store_frames = false;
    io.orthonormalize = true;
    const Trajectory base = integrate(sys, cfg.T, cfg.h, cfg.tol, io);
    const Trajectory pert = integrate(perturbed_system(sys, p), cfg.T, cfg.h, cfg.tol, io);
    const ExponentReport rb = exponents(base, cfg.tail_fraction);
    const ExponentReport rp = exponents(pert, cfg.tail_fraction);
    ShiftReport r;
    r.unperturbed = rb.sorted_descending();
    r.perturbed = rp.sorted_descending();
    r.unperturbed_converged = rb.converged;
    r.perturbed_converged = rp.converged;
    for (std::size_t i = 0; i < r.unperturbed.size(); ++i) {
        r.shifts.push_back(std::abs(r.unperturbed[i] - r.perturbed[i]));
        r.max_shift = std::max(r.max_shift, r.shifts.back());
    }
    r.epsilon = epsilon;
    r.stable = r.max_shift < epsilon;
    r.perturbation_class = p.label();
    return r;
}

/// Off-diagonal perturbation delta/sqrt(t+1) of the two-dimensional base pair.
inline Perturbation perron_perturbation(double delta) {
    std::vector<Expr> b(4);
    if (delta != 0.0) {
        std::ostringstream os;
        os.precision(17);
        os << delta;
        b[1] = b[2] = Expr::parse(os.str() + "/sqrt(t+1)");
    }
    return Perturbation(2, std::move(b));
}

/// Off-diagonal perturbation delta*exp(-beta t) with the matching declared decay.
inline Perturbation decaying_perturbation(double delta, double beta) {
    std::ostringstream os;
    os.precision(17);
    os << delta << "*exp(-" << beta << "*t)";
    std::vector<Expr> b(4);
    b[1] = b[2] = Expr::parse(os.str());
    return Perturbation(2, std::move(b), Decay{delta, beta});
}

struct PerronDemo {
    double delta = 0.0;
    ShiftReport report;
};

inline PerronDemo perron_demo(double delta, const ExperimentSettings& cfg = {}, double epsilon = 0.5) {
    if (!(delta >= 0.0 && delta <= 1.0)) throw InvalidArgument("delta must lie in [0, 1]");
    PerronDemo d;
    d.delta = delta;
    d.report = stability_experiment(catalog("perron-base"), perron_perturbation(delta), epsilon, cfg);
    return d;
}

}  // namespace lyapsep
