#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace bctoda {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};

// Domain errors thrown by the numeric layers.  All derive from std::runtime_error
// so callers can catch coarsely; the concrete type identifies the failure.
struct PoleError : std::runtime_error {
    explicit PoleError(const std::string& what) : std::runtime_error(what) {}
};
struct ParameterDomainError : std::runtime_error {
    explicit ParameterDomainError(const std::string& what) : std::runtime_error(what) {}
};
struct DimensionUnsupported : std::runtime_error {
    explicit DimensionUnsupported(const std::string& what) : std::runtime_error(what) {}
};
struct ContourViolation : std::runtime_error {
    explicit ContourViolation(const std::string& what) : std::runtime_error(what) {}
};
struct NotConverged : std::runtime_error {
    explicit NotConverged(const std::string& what) : std::runtime_error(what) {}
};
struct DegenerateSpectrum : std::runtime_error {
    explicit DegenerateSpectrum(const std::string& what) : std::runtime_error(what) {}
};
struct InternalDisagreement : std::runtime_error {
    explicit InternalDisagreement(const std::string& what) : std::runtime_error(what) {}
};
struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

// Couplings of the boundary-interaction chain.  g is tied to (alpha, beta) by
// g = 1/2 + alpha/beta and the constructor keeps that exact.
struct ModelParams {
    double alpha;
    double beta;
    double g;

    ModelParams(double alpha_, double beta_) : alpha(alpha_), beta(beta_), g(0.5 + alpha_ / beta_) {
        validate();
    }
    static ModelParams from_g(double g_, double beta_) {
        return ModelParams((g_ - 0.5) * beta_, beta_);
    }
    void validate() const {
        if (!(beta > 0.0)) throw ParameterDomainError("ModelParams: beta must be positive");
        if (!(g > 0.0)) throw ParameterDomainError("ModelParams: g must be positive");
    }
};

using SpectralVector = std::vector<Complex>;
using PositionVector = std::vector<double>;

inline double sum(const PositionVector& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
}
inline Complex sum(const SpectralVector& x) {
    Complex s = 0.0;
    for (const Complex& v : x) s += v;
    return s;
}

inline double max_abs_imag(const SpectralVector& lam) {
    double m = 0.0;
    for (const Complex& l : lam) m = std::max(m, std::abs(l.imag()));
    return m;
}

inline bool all_real(const SpectralVector& lam, double tol = 0.0) {
    for (const Complex& l : lam)
        if (std::abs(l.imag()) > tol) return false;
    return true;
}

}  // namespace bctoda
