#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lyapsep {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& detail)
        : Error(format(offset, expected, detail)), offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    static std::string format(std::size_t offset, const std::vector<std::string>& expected,
                              const std::string& detail) {
        std::string msg = "syntax error at offset " + std::to_string(offset) + ": " + detail;
        if (!expected.empty()) {
            msg += " (expected one of:";
            for (const auto& e : expected) msg += " " + e;
            msg += ")";
        }
        return msg;
    }

    std::size_t offset_;
    std::vector<std::string> expected_;
};

/// Expression evaluated outside its domain (log of a non-positive value, ...).
class DomainError : public Error {
public:
    DomainError(std::string node, double t, const std::string& detail)
        : Error("domain error in '" + node + "' at t=" + std::to_string(t) + ": " + detail),
          node_(std::move(node)), t_(t) {}

    const std::string& node() const noexcept { return node_; }
    double t() const noexcept { return t_; }

private:
    std::string node_;
    double t_;
};

/// Bad system or configuration input (dimension mismatch, unknown catalog name, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Integrator or linear-algebra failure.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// An analysis with no feasible answer within its knobs (intercept cap, ...).
class Infeasible : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Arguments that violate an operation's preconditions.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace lyapsep
