#pragma once

#include "bctoda/types.hpp"

namespace bctoda::sf {

// Value of log Gamma(z) split into modulus and phase, so that
// Gamma(z) = exp(log_modulus) * exp(i * phase).  The phase is the principal
// imaginary part of log Gamma; downstream code only consumes products formed
// in this representation.
struct LogGammaValue {
    double log_modulus;
    double phase;

    Complex as_complex_log() const { return Complex(log_modulus, phase); }
};

// Complex log-gamma.  Lanczos approximation (g = 7, 9 terms) with the
// reflection formula for Re z < 1/2.  Throws PoleError at non-positive
// integers.
LogGammaValue log_gamma(Complex z);

// Gamma(z) = exp(log_gamma(z)).
Complex gamma(Complex z);

// log of sin(pi z), stable for large |Im z|.
Complex log_sin_pi(Complex z);

// Gamma(a + b) * Gamma(a - b), accumulated in log space.
Complex gamma_prod_pm(Complex a, Complex b);

// Gamma(a+b) Gamma(a-b) Gamma(-a+b) Gamma(-a-b), accumulated in log space.
Complex gamma_prod_pmpm(Complex a, Complex b);

// Log-space accumulator for long gamma products.  Keeps sum of complex logs;
// exponentiates once at the end.
class GammaProduct {
   public:
    GammaProduct& mul_gamma(Complex z) {
        log_ += log_gamma(z).as_complex_log();
        return *this;
    }
    GammaProduct& div_gamma(Complex z) {
        log_ -= log_gamma(z).as_complex_log();
        return *this;
    }
    GammaProduct& mul(Complex v) {
        log_ += std::log(v);
        return *this;
    }
    GammaProduct& mul_log(Complex logv) {
        log_ += logv;
        return *this;
    }
    Complex log() const { return log_; }
    Complex value() const { return std::exp(log_); }

   private:
    Complex log_{0.0, 0.0};
};

// Whittaker function W_{kappa,mu}(z) for z > 0, Re kappa < 1/2 and
// Re(mu - kappa) > -1/2.  Evaluated by two independent internal routes
// (an integral representation and the two-term confluent series combination);
// throws InternalDisagreement if they differ beyond tolerance.
Complex whittaker_w(Complex kappa, Complex mu, double z);

// The two routes individually, exposed for tests.
Complex whittaker_w_integral(Complex kappa, Complex mu, double z);
Complex whittaker_w_series(Complex kappa, Complex mu, double z);

// Kummer confluent series M(a; c; z) = 1F1(a; c; z).
Complex hyp1f1(Complex a, Complex c, Complex z);

}  // namespace bctoda::sf
