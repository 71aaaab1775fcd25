#pragma once

#include <vector>

#include "bctoda/quadrature.hpp"
#include "bctoda/types.hpp"

namespace bctoda::bc {

using quad::ComplexEstimate;
using quad::QuadratureBudget;

// Index of the hyperoctahedral series: lower-triangular matrix b_{ij} (i > j)
// flattened row-wise plus the vector (b_1, ..., b_n).
struct BCSeriesIndex {
    int n = 1;
    std::vector<int> bij;  // size n(n-1)/2
    std::vector<int> bk;   // size n

    int at(int i, int j) const;  // b_{ij}, 1-based, i > j
    // q_{ij} = b_{ij} + ... + b_{nj} - b_j for j < i <= n, and q_{n+1,j} = -b_j
    int q(int i, int j) const;
    int total() const;
};

struct SignedPermutation {
    std::vector<int> sigma;  // 0-based permutation
    std::vector<int> eps;    // +1 / -1 signs
};

// all 2^n n! signed permutations, deterministic order
std::vector<SignedPermutation> signed_permutations(int n);

// Raising kernel: n-dimensional integral with the boundary weight on z_1.
ComplexEstimate bb_lambda_kernel(Complex lam, const PositionVector& x, const PositionVector& y,
                                 const ModelParams& params, const QuadratureBudget& budget);

// Full and reduced transfer kernels.
ComplexEstimate bbq_kernel(Complex lam, const PositionVector& x, const PositionVector& y,
                           const ModelParams& params, const QuadratureBudget& budget);
ComplexEstimate bbq_reduced_kernel(Complex lam, const PositionVector& x, const PositionVector& y,
                                   const ModelParams& params, const QuadratureBudget& budget);

enum class GgMode { automatic, tensor, monte_carlo };

// Iterated raising-operator representation.  n = 1 is a single adaptive
// integral; n = 2 defaults to importance-sampled Monte Carlo over the joint
// 4-dimensional integrand (tensor mode available for cross-checks).
ComplexEstimate psi_gg(const SpectralVector& lam, const PositionVector& x,
                       const ModelParams& params, const QuadratureBudget& budget,
                       GgMode mode = GgMode::automatic);

// Spectral kernels of the two contour representations; m = |lam| >= n = |gam|.
Complex kernel_k1(const SpectralVector& lam, const SpectralVector& gam, const ModelParams& params);
Complex kernel_k2(const SpectralVector& lam, const SpectralVector& gam, const ModelParams& params);

// Contour representations.  Epsilon < 0 means the default choice.
ComplexEstimate psi_mb1(const SpectralVector& lam, const PositionVector& x,
                        const ModelParams& params, const QuadratureBudget& budget,
                        double epsilon = -1.0);
ComplexEstimate psi_mb2(const SpectralVector& lam, const PositionVector& x,
                        const ModelParams& params, const QuadratureBudget& budget,
                        double epsilon = -1.0);

// Plancherel density, in the hyperbolic-regularized form (entire except for
// the Gamma(g +- i lam) factors).
Complex bc_measure(const SpectralVector& lam, const ModelParams& params);

// Series coefficient c_B(lam) = prod_k c_B^k(lam).
Complex hc_coeff_bc(const BCSeriesIndex& B, const SpectralVector& lam, const ModelParams& params);

// Hyperoctahedral series, symmetrized over signed permutations; deriv is a
// partial-derivative multi-index applied termwise.
ComplexEstimate psi_series(const SpectralVector& lam, const PositionVector& x,
                           const ModelParams& params, int max_degree,
                           const QuadratureBudget& budget);
ComplexEstimate psi_series_deriv(const SpectralVector& lam, const PositionVector& x,
                                 const ModelParams& params, const std::vector<int>& deriv,
                                 int max_degree, const QuadratureBudget& budget);

// Leading plane-wave sum over the Weyl group.
Complex psi_asymptotic(const SpectralVector& lam, const PositionVector& x,
                       const ModelParams& params);

}  // namespace bctoda::bc
