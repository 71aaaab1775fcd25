#include "bctoda/gl.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "bctoda/special.hpp"

namespace bctoda::gl {

namespace {

void check_shapes(std::size_t nx, std::size_t ny, std::size_t want_y, const char* who) {
    if (ny != want_y)
        throw ShapeMismatch(std::string(who) + ": y must have length " + std::to_string(want_y) +
                            ", got " + std::to_string(ny));
    if (nx < 1) throw ShapeMismatch(std::string(who) + ": x must be non-empty");
}

// lam_i - lam_j on the imaginary integer lattice makes a Gamma argument in the
// series coefficients degenerate somewhere in the index lattice
void check_generic(const SpectralVector& lam) {
    for (std::size_t i = 0; i < lam.size(); ++i)
        for (std::size_t j = i + 1; j < lam.size(); ++j) {
            Complex w = lam[i] - lam[j];
            if (std::abs(w.real()) < 1e-12 && std::abs(w.imag() - std::round(w.imag())) < 1e-12)
                throw DegenerateSpectrum(
                    "phi_series: lambda_i - lambda_j on the imaginary integer lattice");
        }
}

std::vector<std::vector<int>> permutations_of(int n) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::vector<int>> out;
    do {
        out.push_back(idx);
    } while (std::next_permutation(idx.begin(), idx.end()));
    return out;
}

void enumerate_shell(int slots, int total, std::vector<int>& cur,
                     const std::function<void(const std::vector<int>&)>& emit) {
    if (slots == 1) {
        cur.push_back(total);
        emit(cur);
        cur.pop_back();
        return;
    }
    for (int v = 0; v <= total; ++v) {
        cur.push_back(v);
        enumerate_shell(slots - 1, total - v, cur, emit);
        cur.pop_back();
    }
}

}  // namespace

int GLSeriesIndex::at(int i, int j) const {
    return a[static_cast<std::size_t>((i - 2) * (i - 1) / 2 + (j - 1))];
}

std::vector<int> GLSeriesIndex::p_matrix() const {
    std::vector<int> p(a.size(), 0);
    for (int j = 1; j < n; ++j) {
        int acc = 0;
        for (int i = n; i > j; --i) {
            acc += at(i, j);
            p[static_cast<std::size_t>((i - 2) * (i - 1) / 2 + (j - 1))] = acc;
        }
    }
    return p;
}

int GLSeriesIndex::total() const {
    int t = 0;
    for (int v : a) t += v;
    return t;
}

Complex lambda_kernel(Complex lam, const PositionVector& x, const PositionVector& y) {
    std::size_t n = x.size();
    check_shapes(n, y.size(), n - 1, "lambda_kernel");
    Complex arg = kI * lam * (sum(x) - sum(y));
    double decay = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j)
        decay += std::exp(x[j] - y[j]) + std::exp(y[j] - x[j + 1]);
    return std::exp(arg - decay);
}

Complex q_kernel(Complex lam, const PositionVector& x, const PositionVector& y) {
    std::size_t n = x.size();
    check_shapes(n, y.size(), n, "q_kernel");
    Complex arg = kI * lam * (sum(x) - sum(y));
    double decay = std::exp(x[n - 1] - y[n - 1]);
    for (std::size_t j = 0; j + 1 < n; ++j)
        decay += std::exp(x[j] - y[j]) + std::exp(y[j] - x[j + 1]);
    return std::exp(arg - decay);
}

Complex gl_measure(const SpectralVector& lam) {
    std::size_t n = lam.size();
    double nfact = 1.0;
    for (std::size_t k = 2; k <= n; ++k) nfact *= static_cast<double>(k);
    Complex prod = 1.0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) {
            Complex d = lam[j] - lam[k];
            prod *= d * std::sinh(M_PI * d) / M_PI;
        }
    return prod / (nfact * std::pow(2.0 * M_PI, static_cast<double>(n)));
}

Complex hc_coeff_gl(const GLSeriesIndex& A, const SpectralVector& lam) {
    const int n = A.n;
    if (static_cast<int>(lam.size()) != n) throw ShapeMismatch("hc_coeff_gl: lambda size mismatch");
    auto p = A.p_matrix();
    auto pval = [&](int i, int j) -> int {
        if (i > n) return 0;  // p_{n+1,j} = 0
        return p[static_cast<std::size_t>((i - 2) * (i - 1) / 2 + (j - 1))];
    };
    sf::GammaProduct acc;
    double sign = 1.0;
    double factorials = 1.0;
    for (int k = 2; k <= n; ++k)
        for (int i = 1; i <= k - 1; ++i) {
            int aki = A.at(k, i);
            if (aki % 2 == 1) sign = -sign;
            for (int m = 2; m <= aki; ++m) factorials *= m;
            for (int j = 1; j <= k; ++j) {
                if (j == i) continue;
                acc.mul_gamma(kI * (lam[static_cast<std::size_t>(j - 1)] - lam[static_cast<std::size_t>(i - 1)]) -
                              static_cast<double>(pval(k, i)) + static_cast<double>(pval(k + 1, j)));
            }
            for (int j = 1; j <= k - 1; ++j) {
                if (j == i) continue;
                acc.div_gamma(kI * (lam[static_cast<std::size_t>(j - 1)] - lam[static_cast<std::size_t>(i - 1)]) -
                              static_cast<double>(pval(k, i)) + static_cast<double>(pval(k, j)));
            }
        }
    return sign / factorials * acc.value();
}

bool in_gl_zone(const PositionVector& x, double margin) {
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        if (!(x[i + 1] - x[i] >= margin)) return false;
    return true;
}

namespace {

ComplexEstimate phi_series_branch(const SpectralVector& lam, const PositionVector& x,
                                  const std::vector<int>& deriv, int max_total_degree,
                                  const QuadratureBudget& budget) {
    const int n = static_cast<int>(lam.size());
    const int slots = n * (n - 1) / 2;
    ComplexEstimate out;
    Complex total = 0.0;
    double last_shell = 0.0;
    GLSeriesIndex A;
    A.n = n;
    for (int N = 0; N <= max_total_degree; ++N) {
        Complex shell = 0.0;
        double shell_abs = 0.0;
        auto emit = [&](const std::vector<int>& idx) {
            A.a = idx;
            Complex term = hc_coeff_gl(A, lam);
            std::vector<Complex> mu(static_cast<std::size_t>(n));
            for (int k = 1; k <= n; ++k) {
                Complex m = kI * lam[static_cast<std::size_t>(k - 1)];
                for (int j = 1; j < k; ++j) m -= static_cast<double>(A.at(k, j));
                for (int i = k + 1; i <= n; ++i) m += static_cast<double>(A.at(i, k));
                mu[static_cast<std::size_t>(k - 1)] = m;
            }
            Complex expo = 0.0;
            for (int k = 0; k < n; ++k)
                expo += mu[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
            term *= std::exp(expo);
            for (int k = 0; k < n; ++k)
                for (int d = 0; d < deriv[static_cast<std::size_t>(k)]; ++d)
                    term *= mu[static_cast<std::size_t>(k)];
            shell += term;
            shell_abs += std::abs(term);
            ++out.evals;
        };
        if (slots == 0) {
            std::vector<int> empty;
            emit(empty);
            total += shell;
            out.value = total;
            out.err = 0.0;
            return out;
        }
        std::vector<int> cur;
        enumerate_shell(slots, N, cur, emit);
        total += shell;
        last_shell = shell_abs;
        if (N >= 2 && shell_abs <= budget.rel_tol * std::abs(total) + budget.abs_tol) {
            out.value = total;
            out.err = shell_abs;
            return out;
        }
    }
    out.value = total;
    out.err = last_shell;
    if (last_shell > budget.rel_tol * std::abs(total) + budget.abs_tol)
        throw NotConverged("phi_series: shell contribution did not fall below tolerance");
    return out;
}

}  // namespace

ComplexEstimate phi_series_deriv(const SpectralVector& lam, const PositionVector& x,
                                 const std::vector<int>& deriv, int max_total_degree,
                                 const QuadratureBudget& budget) {
    const int n = static_cast<int>(lam.size());
    if (n > 3) throw DimensionUnsupported("phi_series: n <= 3");
    if (static_cast<int>(x.size()) != n) throw ShapeMismatch("phi_series: |x| != |lam|");
    check_generic(lam);
    ComplexEstimate out;
    for (const auto& sigma : permutations_of(n)) {
        SpectralVector ls(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k)
            ls[static_cast<std::size_t>(k)] =
                lam[static_cast<std::size_t>(sigma[static_cast<std::size_t>(k)])];
        auto branch = phi_series_branch(ls, x, deriv, max_total_degree, budget);
        out.value += branch.value;
        out.err += branch.err;
        out.evals += branch.evals;
    }
    return out;
}

ComplexEstimate phi_series(const SpectralVector& lam, const PositionVector& x,
                           int max_total_degree, const QuadratureBudget& budget) {
    return phi_series_deriv(lam, x, std::vector<int>(lam.size(), 0), max_total_degree, budget);
}

Complex phi_asymptotic(const SpectralVector& lam, const PositionVector& x) {
    const int n = static_cast<int>(lam.size());
    Complex total = 0.0;
    for (const auto& sigma : permutations_of(n)) {
        sf::GammaProduct g;
        Complex expo = 0.0;
        for (int i = 0; i < n; ++i)
            expo += kI * lam[static_cast<std::size_t>(sigma[static_cast<std::size_t>(i)])] *
                    x[static_cast<std::size_t>(i)];
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                g.mul_gamma(kI * (lam[static_cast<std::size_t>(sigma[static_cast<std::size_t>(j)])] -
                                  lam[static_cast<std::size_t>(sigma[static_cast<std::size_t>(i)])]));
        total += g.value() * std::exp(expo);
    }
    return total;
}

ComplexEstimate phi_gg(const SpectralVector& lam, const PositionVector& x,
                       const QuadratureBudget& budget) {
    const std::size_t n = lam.size();
    if (x.size() != n) throw ShapeMismatch("phi_gg: |x| != |lam|");
    if (n > 3) throw DimensionUnsupported("phi_gg: n <= 3");

    // a common imaginary shift moves out as a plane-wave factor
    double shift = lam[0].imag();
    for (const Complex& l : lam)
        if (std::abs(l.imag() - shift) > 1e-13)
            throw ParameterDomainError("phi_gg: lambda must be real up to a common imaginary shift");
    std::vector<double> lr(n);
    for (std::size_t k = 0; k < n; ++k) lr[k] = lam[k].real();
    double pref = std::exp(-shift * sum(x));

    ComplexEstimate est;
    if (n == 1) {
        est.value = std::exp(kI * lr[0] * x[0]);
    } else if (n == 2) {
        auto f = [&](double y) {
            return std::exp(kI * lr[1] * (x[0] + x[1] - y) - std::exp(x[0] - y) -
                            std::exp(y - x[1]) + kI * lr[0] * y);
        };
        est = quad::integrate_line(f, budget);
    } else {
        auto f = [&](const std::vector<double>& v) {
            double y1 = v[0], y2 = v[1], w = v[2];
            Complex outer = kI * lr[2] * (x[0] + x[1] + x[2] - y1 - y2) - std::exp(x[0] - y1) -
                            std::exp(y1 - x[1]) - std::exp(x[1] - y2) - std::exp(y2 - x[2]);
            Complex inner =
                kI * lr[1] * (y1 + y2 - w) - std::exp(y1 - w) - std::exp(w - y2) + kI * lr[0] * w;
            return std::exp(outer + inner);
        };
        est = quad::integrate_nd(
            f, {quad::Interval::whole(), quad::Interval::whole(), quad::Interval::whole()},
            budget);
    }
    est.value *= pref;
    est.err *= pref;
    return est;
}

ComplexEstimate phi_mb(const SpectralVector& lam, const PositionVector& x,
                       const QuadratureBudget& budget, double contour_base) {
    const std::size_t n = lam.size();
    if (x.size() != n) throw ShapeMismatch("phi_mb: |x| != |lam|");
    if (n > 3) throw DimensionUnsupported("phi_mb: n <= 3");
    ComplexEstimate est;
    if (n == 1) {
        est.value = std::exp(kI * lam[0] * x[0]);
        return est;
    }
    double max_im = 0.0;
    for (const Complex& l : lam) max_im = std::max(max_im, l.imag());
    double r = (contour_base > max_im) ? contour_base : max_im + 0.4;
    if (n == 2) {
        quad::ContourSpec spec;
        spec.dim = 1;
        spec.offsets = {-r};
        auto f = [&](const std::vector<Complex>& gam) {
            sf::GammaProduct p;
            p.mul_gamma(kI * lam[0] - kI * gam[0]).mul_gamma(kI * lam[1] - kI * gam[0]);
            p.mul_log(kI * x[1] * (lam[0] + lam[1] - gam[0]) + kI * gam[0] * x[0]);
            return p.value() / (2.0 * M_PI);
        };
        return quad::integrate_contour(f, spec, budget);
    }
    // n = 3: level contours r1 > r2 > max Im lambda, variables (g11; g21, g22)
    double r2 = r, r1 = r + 0.5;
    quad::ContourSpec spec;
    spec.dim = 3;
    spec.offsets = {-r1, -r2, -r2};
    auto f = [&](const std::vector<Complex>& gam) {
        Complex g11 = gam[0], g21 = gam[1], g22 = gam[2];
        sf::GammaProduct p;
        for (const Complex& l : lam) p.mul_gamma(kI * l - kI * g21).mul_gamma(kI * l - kI * g22);
        p.mul_gamma(kI * g21 - kI * g11).mul_gamma(kI * g22 - kI * g11);
        p.mul_log(kI * x[2] * (lam[0] + lam[1] + lam[2] - g21 - g22) +
                  kI * x[1] * (g21 + g22 - g11) + kI * x[0] * g11);
        // 1/(G(w) G(-w)) = -w sin(pi w)/pi stays finite on the diagonal
        Complex w = kI * (g21 - g22);
        Complex meas = -w * std::sin(M_PI * w) / M_PI;
        return meas * p.value() / (2.0 * std::pow(2.0 * M_PI, 3));
    };
    return quad::integrate_contour(f, spec, budget);
}

Complex phi_flexible(const std::vector<double>& lam, const PositionVector& x,
                     const QuadratureBudget& budget) {
    const std::size_t n = lam.size();
    if (n == 1) return std::exp(kI * lam[0] * x[0]);
    double min_gap = 1e300;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            min_gap = std::min(min_gap, std::abs(lam[i] - lam[j]));
    SpectralVector lc(lam.begin(), lam.end());
    if (in_gl_zone(x, 1.0) && min_gap > 0.05) {
        QuadratureBudget b = budget;
        b.rel_tol = std::max(budget.rel_tol, 1e-11);
        return phi_series(lc, x, 60, b).value;
    }
    return phi_mb(lc, x, budget).value;
}

}  // namespace bctoda::gl
