#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace frp {

/// Short scientific rendering of a double for error messages.
inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

/// Base class for every failure raised by the library.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument sits on a pole of a Gamma function or a hypergeometric parameter.
class PoleError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class OverflowError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A series or expansion could not reach the requested tolerance.
class AccuracyLossError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// 2F1 at z = 1 with c - a - b <= 0.
class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, double achieved)
        : NumericalError(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

class SingularMatrixError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Iterative solver failed; carries the best relative residual seen.
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double best_residual)
        : NumericalError(what), best_residual_(best_residual) {}
    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// Boundary-layer fit missed its tolerance; carries the achieved RMS.
class FitToleranceError : public NumericalError {
public:
    FitToleranceError(const std::string& what, double fit_rms)
        : NumericalError(what), fit_rms_(fit_rms) {}
    double fit_rms() const noexcept { return fit_rms_; }

private:
    double fit_rms_;
};

/// Bad input that is the caller's fault (sizes, empty lists, geometry).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace frp
