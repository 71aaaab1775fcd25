#pragma once

#include <vector>

#include "bctoda/quadrature.hpp"
#include "bctoda/types.hpp"

namespace bctoda::gl {

using quad::ComplexEstimate;
using quad::QuadratureBudget;

// Series index: lower triangular matrix of nonnegative integers a_{ij}
// (i > j), flattened row-wise: (2,1), (3,1), (3,2), ...
struct GLSeriesIndex {
    int n = 1;
    std::vector<int> a;  // size n(n-1)/2

    int at(int i, int j) const;               // a_{ij}, 1-based, i > j
    std::vector<int> p_matrix() const;        // p_{ij} = sum_{k >= i} a_{kj}, with p_{n+1,j} = 0
    int total() const;
};

// exp(i lam (sum x - sum y) - sum_j (e^{x_j - y_j} + e^{y_j - x_{j+1}}))
Complex lambda_kernel(Complex lam, const PositionVector& x, const PositionVector& y);

// same with the extra closing factor e^{x_n - y_n}
Complex q_kernel(Complex lam, const PositionVector& x, const PositionVector& y);

// spectral density in its hyperbolic (entire) form
Complex gl_measure(const SpectralVector& lam);

// Harish-Chandra series coefficient c_A(lam)
Complex hc_coeff_gl(const GLSeriesIndex& A, const SpectralVector& lam);

// Wave function evaluators.  All three agree on their common domain.
ComplexEstimate phi_gg(const SpectralVector& lam, const PositionVector& x,
                       const QuadratureBudget& budget);

ComplexEstimate phi_mb(const SpectralVector& lam, const PositionVector& x,
                       const QuadratureBudget& budget, double contour_base = -1.0);

ComplexEstimate phi_series(const SpectralVector& lam, const PositionVector& x,
                           int max_total_degree, const QuadratureBudget& budget);

// series with termwise derivative: multiplies each term by prod_k mu_k^{d_k}
ComplexEstimate phi_series_deriv(const SpectralVector& lam, const PositionVector& x,
                                 const std::vector<int>& deriv, int max_total_degree,
                                 const QuadratureBudget& budget);

// leading coefficient sum: symmetrized plane waves with Gamma coefficients
Complex phi_asymptotic(const SpectralVector& lam, const PositionVector& x);

// true when x is strictly increasing with margin
bool in_gl_zone(const PositionVector& x, double margin);

// dispatcher used by spectral integrands: series in the zone and away from
// spectral collisions, Mellin-Barnes otherwise; lam must be real here
Complex phi_flexible(const std::vector<double>& lam, const PositionVector& x,
                     const QuadratureBudget& budget);

}  // namespace bctoda::gl
