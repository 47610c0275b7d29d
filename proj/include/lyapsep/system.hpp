#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lyapsep/errors.hpp"
#include "lyapsep/expr.hpp"

namespace lyapsep {

inline constexpr std::size_t kMaxDimension = 16;
inline constexpr double kDefaultProbeHorizon = 600.0;
inline constexpr std::size_t kProbePoints = 1000;

/// Raised when an entry fails to evaluate on the construction probe grid.
class ProbeError : public ConfigError {
public:
    ProbeError(std::size_t row, std::size_t col, double t, const std::string& detail)
        : ConfigError("entry A[" + std::to_string(row + 1) + "][" + std::to_string(col + 1) +
                      "] fails to evaluate at t=" + std::to_string(t) + ": " + detail),
          t_(t) {}
    double t() const noexcept { return t_; }

private:
    double t_;
};

/// Linear system x' = A(t) x with A given entrywise by time expressions.
class System {
public:
    System(std::size_t n, std::vector<Expr> entries, std::string name = "system",
           double probe_horizon = kDefaultProbeHorizon)
        : n_(n), entries_(std::move(entries)), name_(std::move(name)) {
        if (n_ < 1 || n_ > kMaxDimension)
            throw ConfigError("dimension must be between 1 and " + std::to_string(kMaxDimension) + ", got " +
                              std::to_string(n_));
        if (entries_.size() != n_ * n_)
            throw ConfigError("expected " + std::to_string(n_ * n_) + " entries, got " +
                              std::to_string(entries_.size()));
        diagonal_ = true;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                if (i != j && !entry(i, j).is_zero_literal()) diagonal_ = false;
        probe(probe_horizon);
    }

    static System diagonal(std::vector<Expr> diag, std::string name = "system",
                           double probe_horizon = kDefaultProbeHorizon) {
        const std::size_t n = diag.size();
        std::vector<Expr> entries(n * n);
        for (std::size_t i = 0; i < n; ++i) entries[i * n + i] = std::move(diag[i]);
        return System(n, std::move(entries), std::move(name), probe_horizon);
    }

    std::size_t dim() const noexcept { return n_; }
    bool is_diagonal() const noexcept { return diagonal_; }
    const std::string& name() const noexcept { return name_; }
    const Expr& entry(std::size_t i, std::size_t j) const { return entries_.at(i * n_ + j); }
    const std::vector<Expr>& entries() const noexcept { return entries_; }

    /// Validation notes attached by the catalog (for example a parameter ordering warning).
    const std::vector<std::string>& notes() const noexcept { return notes_; }
    System& add_note(std::string note) {
        notes_.push_back(std::move(note));
        return *this;
    }

    Eigen::MatrixXd matrix(double t) const {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) {
                const Expr& e = entry(i, j);
                if (!e.is_zero_literal())
                    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = e.eval(t);
            }
        return a;
    }

    double diag_entry(std::size_t i, double t) const { return entry(i, i).eval(t); }

    std::string describe() const {
        std::ostringstream os;
        os << name_ << " (n=" << n_ << (diagonal_ ? ", diagonal" : "") << ")";
        return os.str();
    }

    /// Same entries on the same dimension; names are ignored.
    bool same_entries(const System& other) const {
        if (n_ != other.n_) return false;
        for (std::size_t k = 0; k < entries_.size(); ++k)
            if (entries_[k] != other.entries_[k]) return false;
        return true;
    }

private:
    void probe(double horizon) const {
        if (!(horizon > 0.0)) return;
        for (std::size_t k = 0; k < kProbePoints; ++k) {
            const double t = horizon * static_cast<double>(k) / static_cast<double>(kProbePoints - 1);
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = 0; j < n_; ++j) {
                    try {
                        entry(i, j).eval(t);
                    } catch (const DomainError& e) {
                        throw ProbeError(i, j, t, e.what());
                    }
                }
        }
    }

    std::size_t n_;
    std::vector<Expr> entries_;
    std::string name_;
    bool diagonal_ = false;
    std::vector<std::string> notes_;
};

namespace detail {

inline bool literal_value(const Expr& e, double& out) {
    if (e.kind() == ExprKind::Constant) {
        out = e.value();
        return true;
    }
    if (e.kind() == ExprKind::Neg && e.lhs().kind() == ExprKind::Constant) {
        out = -e.lhs().value();
        return true;
    }
    return false;
}

}  // namespace detail

/// A(t) - gamma I. Literal diagonal entries are folded; gamma == 0 returns the entries unchanged.
inline System shift(const System& sys, double gamma) {
    if (gamma == 0.0) return sys;
    std::vector<Expr> entries = sys.entries();
    const std::size_t n = sys.dim();
    for (std::size_t i = 0; i < n; ++i) {
        Expr& e = entries[i * n + i];
        double v = 0.0;
        if (detail::literal_value(e, v))
            e = Expr::constant(v - gamma);
        else if (gamma > 0.0)
            e = e - Expr::constant(gamma);
        else
            e = e + Expr::constant(-gamma);
    }
    std::ostringstream name;
    name << sys.name() << " shifted by " << gamma;
    return System(n, std::move(entries), name.str(), 0.0);
}

/// Diagonal system with a constant `lambda` inserted after the first `j` diagonal entries.
inline System insert_lambda(const System& sys, std::size_t j, double lambda) {
    if (!sys.is_diagonal()) throw InvalidArgument("insert_lambda requires a diagonal system");
    if (j > sys.dim()) throw InvalidArgument("insertion index out of range");
    std::vector<Expr> diag;
    for (std::size_t i = 0; i < sys.dim(); ++i) {
        if (i == j) diag.push_back(Expr::constant(lambda));
        diag.push_back(sys.entry(i, i));
    }
    if (j == sys.dim()) diag.push_back(Expr::constant(lambda));
    std::ostringstream name;
    name << sys.name() << " with " << lambda << " inserted at " << j;
    return System::diagonal(std::move(diag), name.str(), 0.0);
}

/// Diagonal system made of the given diagonal entries of `sys`, in the given order.
inline System diagonal_subsystem(const System& sys, const std::vector<std::size_t>& order) {
    if (!sys.is_diagonal()) throw InvalidArgument("diagonal_subsystem requires a diagonal system");
    std::vector<Expr> diag;
    for (std::size_t i : order) diag.push_back(sys.entry(i, i));
    return System::diagonal(std::move(diag), sys.name(), 0.0);
}

}  // namespace lyapsep
