#include "bctoda/special.hpp"

#include <cmath>

#include "bctoda/quadrature.hpp"

namespace bctoda::sf {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;
constexpr double kLogPi = 1.1447298858494001741434273513531;

// Lanczos g = 7, 9 terms.
constexpr double kLanczos[9] = {
    0.99999999999980993,  676.5203681218851,    -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,  12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

bool is_nonpositive_integer(Complex z) {
    if (z.imag() != 0.0) return false;
    double r = z.real();
    return r <= 0.0 && r == std::floor(r);
}

Complex log_gamma_lanczos(Complex z) {
    // valid for Re z >= 0.5
    Complex zm1 = z - 1.0;
    Complex acc = kLanczos[0];
    for (int k = 1; k < 9; ++k) acc += kLanczos[k] / (zm1 + static_cast<double>(k));
    Complex t = zm1 + 7.5;
    return kLogSqrt2Pi + (zm1 + 0.5) * std::log(t) - t + std::log(acc);
}

}  // namespace

Complex log_sin_pi(Complex z) {
    double y = z.imag();
    if (std::abs(y) < 4.0) return std::log(std::sin(M_PI * z));
    // sin(pi z) = -exp(-i pi z) (1 - exp(2 i pi z)) / (2 i)   (Im z > 0)
    if (y > 0.0) {
        Complex w = std::exp(2.0 * M_PI * kI * z);
        return -M_PI * kI * z + std::log(1.0 - w) + Complex(-M_LN2, M_PI_2);
    }
    Complex w = std::exp(-2.0 * M_PI * kI * z);
    return M_PI * kI * z + std::log(1.0 - w) + Complex(-M_LN2, -M_PI_2);
}

LogGammaValue log_gamma(Complex z) {
    if (is_nonpositive_integer(z))
        throw PoleError("log_gamma: pole at z = " + std::to_string(z.real()));
    Complex lg;
    if (z.real() >= 0.5) {
        lg = log_gamma_lanczos(z);
    } else {
        // reflection: log G(z) = log pi - log sin(pi z) - log G(1 - z)
        lg = kLogPi - log_sin_pi(z) - log_gamma_lanczos(1.0 - z);
    }
    return LogGammaValue{lg.real(), lg.imag()};
}

Complex gamma(Complex z) { return std::exp(log_gamma(z).as_complex_log()); }

Complex gamma_prod_pm(Complex a, Complex b) {
    GammaProduct p;
    p.mul_gamma(a + b).mul_gamma(a - b);
    return p.value();
}

Complex gamma_prod_pmpm(Complex a, Complex b) {
    GammaProduct p;
    p.mul_gamma(a + b).mul_gamma(a - b).mul_gamma(-a + b).mul_gamma(-a - b);
    return p.value();
}

Complex hyp1f1(Complex a, Complex c, Complex z) {
    if (is_nonpositive_integer(c)) throw PoleError("hyp1f1: c is a non-positive integer");
    Complex sum = 1.0, term = 1.0;
    for (int k = 0; k < 10000; ++k) {
        term *= (a + static_cast<double>(k)) / (c + static_cast<double>(k)) * z /
                static_cast<double>(k + 1);
        sum += term;
        if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300) && k > 4) return sum;
    }
    throw NotConverged("hyp1f1: series did not converge");
}

Complex whittaker_w_integral(Complex kappa, Complex mu, double z) {
    if (!(z > 0.0)) throw ParameterDomainError("whittaker_w: z must be positive");
    if (kappa.real() >= 0.5)
        throw ParameterDomainError("whittaker_w integral route needs Re kappa < 1/2");
    if ((mu - kappa).real() <= -0.5)
        throw ParameterDomainError("whittaker_w integral route needs Re(mu - kappa) > -1/2");
    // W_{k,m}(z) = z^{1/2+m} 2^{-2m} / Gamma(1/2+m-k)
    //             * int_0^inf du e^{2 m u - (z/2) e^u} (1+e^{-u})^{m+k-1/2} (1-e^{-u})^{m-k-1/2}
    quad::QuadratureBudget budget;
    budget.rel_tol = 1e-13;
    budget.abs_tol = 1e-280;
    Complex em = mu + kappa - 0.5, es = mu - kappa - 0.5;
    auto f = [&](double u) -> Complex {
        double eu = std::exp(u);
        double emu = std::exp(-u);
        Complex lg = 2.0 * mu * u - 0.5 * z * eu + em * std::log1p(emu) +
                     es * std::log(-std::expm1(-u));
        return std::exp(lg);
    };
    auto est = quad::integrate_from(0.0, f, budget);
    GammaProduct pref;
    pref.mul_log((0.5 + mu) * std::log(z) - 2.0 * mu * M_LN2);
    pref.div_gamma(0.5 + mu - kappa);
    return pref.value() * est.value;
}

namespace {

bool nonpositive_int(Complex z) {
    return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

// One confluent-series term of the W combination together with its magnitude,
// so callers can judge how much cancellation the sum suffered.
struct SeriesTerm {
    Complex value;
    double magnitude;
};

SeriesTerm w_series_term(Complex kappa, Complex mu, double z, Complex m) {
    // G(-2m)/G(1/2-m-k) * M_{k,m}(z),  M_{k,m}(z) = e^{-z/2} z^{1/2+m} 1F1(1/2+m-k; 1+2m; z)
    if (nonpositive_int(0.5 - m - kappa)) return {Complex(0.0, 0.0), 0.0};  // denominator pole
    GammaProduct c;
    c.mul_gamma(-2.0 * m).div_gamma(0.5 - m - kappa);
    c.mul_log(-0.5 * z + (0.5 + m) * std::log(z));
    Complex v = c.value() * hyp1f1(0.5 + m - kappa, 1.0 + 2.0 * m, z);
    return {v, std::abs(v)};
}

}  // namespace

Complex whittaker_w_series(Complex kappa, Complex mu, double z) {
    return w_series_term(kappa, mu, z, mu).value + w_series_term(kappa, mu, z, -mu).value;
}

namespace {

// DLMF-style direct integral over t, stable for all z > 0.  Used as the
// second route when the confluent-series combination would cancel.
Complex whittaker_w_integral_t(Complex kappa, Complex mu, double z) {
    quad::QuadratureBudget budget;
    budget.rel_tol = 1e-13;
    budget.abs_tol = 1e-280;
    Complex es = mu - kappa - 0.5, em = mu + kappa - 0.5;
    auto f = [&](double t) -> Complex {
        return std::exp(-t + es * std::log(t) + em * std::log1p(t / z));
    };
    auto est = quad::integrate_from(0.0, f, budget);
    GammaProduct pref;
    pref.mul_log(-0.5 * z + kappa * std::log(z));
    pref.div_gamma(0.5 + mu - kappa);
    return pref.value() * est.value;
}

}  // namespace

Complex whittaker_w(Complex kappa, Complex mu, double z) {
    Complex wi = whittaker_w_integral(kappa, mu, z);
    if (z > 12.0) {
        Complex wt = whittaker_w_integral_t(kappa, mu, z);
        if (std::abs(wi - wt) > 1e-10 * std::max(std::abs(wi), std::abs(wt)))
            throw InternalDisagreement("whittaker_w: the two integral routes disagree");
        return wi;
    }
    double twomu_dist = std::abs(2.0 * mu - std::round(2.0 * mu.real()));
    Complex ws;
    double tol;
    if (mu.imag() == 0.0 && twomu_dist < 1e-4) {
        // near-integer 2mu: symmetric perturbation cancels the O(delta) terms
        const double d = 1e-6;
        ws = 0.5 * (whittaker_w_series(kappa, mu + d, z) + whittaker_w_series(kappa, mu - d, z));
        tol = 1e-7;
    } else {
        auto t1 = w_series_term(kappa, mu, z, mu);
        auto t2 = w_series_term(kappa, mu, z, -mu);
        ws = t1.value + t2.value;
        // the combination cancels down from |t1|+|t2|; scale the floor by the
        // conditioning actually encountered
        double gross = t1.magnitude + t2.magnitude;
        double conditioning = gross / std::max(std::abs(ws), 1e-300);
        tol = std::max(1e-10, 5e-15 * conditioning);
    }
    double scale = std::max(std::abs(wi), std::abs(ws));
    if (std::abs(wi - ws) > tol * scale)
        throw InternalDisagreement("whittaker_w: integral and series routes disagree");
    return wi;
}

}  // namespace bctoda::sf
