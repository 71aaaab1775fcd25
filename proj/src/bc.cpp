#include "bctoda/bc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <memory>
#include <numeric>
#include <unordered_map>

#include "bctoda/gl.hpp"
#include "bctoda/special.hpp"

namespace bctoda::bc {

namespace {

// boundary weight (1 + beta e^{-z1})^{p} (1 - beta e^{-z1})^{q} written in the
// offset u = z1 - ln beta, where beta e^{-z1} = e^{-u}
Complex boundary_weight(double u, Complex p, Complex q) {
    return std::exp(p * std::log1p(std::exp(-u)) + q * std::log(-std::expm1(-u)));
}

void check_im_window(Complex lam, double lo, double hi, const char* who) {
    if (!(lam.imag() > lo && lam.imag() < hi))
        throw ParameterDomainError(std::string(who) + ": Im lambda outside (" +
                                   std::to_string(lo) + ", " + std::to_string(hi) + ")");
}

void check_real(const SpectralVector& lam, const char* who) {
    if (!all_real(lam, 1e-13))
        throw ParameterDomainError(std::string(who) + ": lambda must be real");
}

// lambda_i +- lambda_j or 2 lambda_k on the imaginary integer lattice makes a
// series Gamma argument hit a pole at some index
void check_generic_bc(const SpectralVector& lam, const char* who) {
    auto on_lattice = [](Complex w) {
        return std::abs(w.real()) < 1e-12 && std::abs(w.imag() - std::round(w.imag())) < 1e-12;
    };
    for (std::size_t i = 0; i < lam.size(); ++i) {
        if (on_lattice(2.0 * lam[i])) throw DegenerateSpectrum(std::string(who) + ": 2 lambda_k degenerate");
        for (std::size_t j = i + 1; j < lam.size(); ++j)
            if (on_lattice(lam[i] - lam[j]) || on_lattice(lam[i] + lam[j]))
                throw DegenerateSpectrum(std::string(who) + ": lambda_i +- lambda_j degenerate");
    }
}

}  // namespace

int BCSeriesIndex::at(int i, int j) const {
    return bij[static_cast<std::size_t>((i - 2) * (i - 1) / 2 + (j - 1))];
}

int BCSeriesIndex::q(int i, int j) const {
    // q_{ij} = b_{ij} + ... + b_{nj} - b_j,  q_{n+1,j} = -b_j
    int acc = -bk[static_cast<std::size_t>(j - 1)];
    for (int t = i; t <= n; ++t) acc += at(t, j);
    return acc;
}

int BCSeriesIndex::total() const {
    int t = 0;
    for (int v : bij) t += v;
    for (int v : bk) t += v;
    return t;
}

std::vector<SignedPermutation> signed_permutations(int n) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<SignedPermutation> out;
    do {
        for (int mask = 0; mask < (1 << n); ++mask) {
            SignedPermutation w;
            w.sigma = idx;
            w.eps.resize(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k) w.eps[static_cast<std::size_t>(k)] = (mask >> k) & 1 ? -1 : 1;
            out.push_back(std::move(w));
        }
    } while (std::next_permutation(idx.begin(), idx.end()));
    return out;
}

ComplexEstimate bb_lambda_kernel(Complex lam, const PositionVector& x, const PositionVector& y,
                                 const ModelParams& params, const QuadratureBudget& budget) {
    const std::size_t n = x.size();
    if (y.size() + 1 != n) throw ShapeMismatch("bb_lambda_kernel: |y| must be |x| - 1");
    const double lb = std::log(params.beta), g = params.g;
    sf::GammaProduct pref;
    pref.mul_log(kI * lam * std::log(2.0 * params.beta)).div_gamma(g - kI * lam);

    auto integrand = [&](const std::vector<double>& v) -> Complex {
        // v[0] = z1 - ln beta > 0, v[1..n-1] = z_2..z_n
        double u1 = v[0];
        Complex w = boundary_weight(u1, -kI * lam - g, -kI * lam + g - 1.0);
        double zsum = lb + u1;
        for (std::size_t j = 1; j < n; ++j) zsum += v[j];
        double decay = 0.0;
        auto zj = [&](std::size_t j) { return j == 0 ? lb + u1 : v[j]; };
        for (std::size_t j = 0; j + 1 < n; ++j)
            decay += std::exp(zj(j) - x[j]) + std::exp(zj(j) - y[j]) +
                     std::exp(x[j] - zj(j + 1)) + std::exp(y[j] - zj(j + 1));
        decay += std::exp(zj(n - 1) - x[n - 1]);
        return w * std::exp(kI * lam * (sum(x) + sum(y) - 2.0 * zsum) - decay);
    };
    std::vector<quad::Interval> doms;
    doms.push_back(quad::Interval::from(0.0));
    for (std::size_t j = 1; j < n; ++j) doms.push_back(quad::Interval::whole());
    auto est = quad::integrate_nd(integrand, doms, budget);
    Complex c = pref.value();
    est.value *= c;
    est.err *= std::abs(c);
    return est;
}

ComplexEstimate bbq_kernel(Complex lam, const PositionVector& x, const PositionVector& y,
                           const ModelParams& params, const QuadratureBudget& budget) {
    const std::size_t n = x.size();
    if (y.size() != n) throw ShapeMismatch("bbq_kernel: |y| must equal |x|");
    check_im_window(lam, -params.g, 0.0, "bbq_kernel");
    const double lb = std::log(params.beta), g = params.g;
    sf::GammaProduct pref;
    pref.mul_log(kI * lam * std::log(2.0 * params.beta)).div_gamma(g - kI * lam);

    auto integrand = [&](const std::vector<double>& v) -> Complex {
        // v[0] = z1 - ln beta > 0, v[1..n] = z_2..z_{n+1}
        double u1 = v[0];
        Complex w = boundary_weight(u1, -kI * lam - g, -kI * lam + g - 1.0);
        double zsum = lb + u1;
        for (std::size_t j = 1; j <= n; ++j) zsum += v[j];
        auto zj = [&](std::size_t j) { return j == 0 ? lb + u1 : v[j]; };
        double decay = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            decay += std::exp(zj(j) - x[j]) + std::exp(zj(j) - y[j]) +
                     std::exp(x[j] - zj(j + 1)) + std::exp(y[j] - zj(j + 1));
        return w * std::exp(kI * lam * (sum(x) + sum(y) - 2.0 * zsum) - decay);
    };
    std::vector<quad::Interval> doms;
    doms.push_back(quad::Interval::from(0.0));
    for (std::size_t j = 1; j <= n; ++j) doms.push_back(quad::Interval::whole());
    auto est = quad::integrate_nd(integrand, doms, budget);
    Complex c = pref.value();
    est.value *= c;
    est.err *= std::abs(c);
    return est;
}

ComplexEstimate bbq_reduced_kernel(Complex lam, const PositionVector& x, const PositionVector& y,
                                   const ModelParams& params, const QuadratureBudget& budget) {
    const std::size_t n = x.size();
    if (y.size() != n) throw ShapeMismatch("bbq_reduced_kernel: |y| must equal |x|");
    if (!(lam.imag() < 0.0))
        throw ParameterDomainError("bbq_reduced_kernel: Im lambda must be negative");
    const double lb = std::log(params.beta), g = params.g;
    sf::GammaProduct pref;
    pref.mul_log(-kI * lam * std::log(2.0 * params.beta)).div_gamma(g + kI * lam);

    auto integrand = [&](const std::vector<double>& v) -> Complex {
        double u1 = v[0];
        Complex w = boundary_weight(u1, kI * lam - g, kI * lam + g - 1.0);
        double zsum = lb + u1;
        for (std::size_t j = 1; j < n; ++j) zsum += v[j];
        auto zj = [&](std::size_t j) { return j == 0 ? lb + u1 : v[j]; };
        double decay = 0.0;
        for (std::size_t j = 0; j + 1 < n; ++j)
            decay += std::exp(zj(j) - x[j]) + std::exp(zj(j) - y[j]) +
                     std::exp(x[j] - zj(j + 1)) + std::exp(y[j] - zj(j + 1));
        decay += std::exp(zj(n - 1) - x[n - 1]) + std::exp(zj(n - 1) - y[n - 1]);
        return w * std::exp(kI * lam * (2.0 * zsum - sum(x) - sum(y)) - decay);
    };
    std::vector<quad::Interval> doms;
    doms.push_back(quad::Interval::from(0.0));
    for (std::size_t j = 1; j < n; ++j) doms.push_back(quad::Interval::whole());
    auto est = quad::integrate_nd(integrand, doms, budget);
    Complex c = pref.value();
    est.value *= c;
    est.err *= std::abs(c);
    return est;
}

namespace {

ComplexEstimate psi_gg_n1(double lam, double x, const ModelParams& params,
                          const QuadratureBudget& budget) {
    const double lb = std::log(params.beta), g = params.g;
    sf::GammaProduct pref;
    pref.mul_log(kI * lam * std::log(2.0 * params.beta)).div_gamma(g - kI * lam);
    auto f = [&](double u) -> Complex {
        double z = lb + u;
        Complex w = boundary_weight(u, Complex(-g, -lam), Complex(g - 1.0, -lam));
        return w * std::exp(kI * lam * (x - 2.0 * z) - std::exp(z - x));
    };
    auto est = quad::integrate_from(0.0, f, budget, g - 1.0);
    Complex c = pref.value();
    est.value *= c;
    est.err *= std::abs(c);
    return est;
}

// joint 4-dimensional integrand of the two-particle iterated representation;
// v = (u1, z2, y, u')
struct GgN2 {
    double l1, l2;
    double x1, x2;
    double lb, g, beta;

    Complex operator()(const std::vector<double>& v) const {
        double u1 = v[0], z2 = v[1], y = v[2], up = v[3];
        double z1 = lb + u1, zp = lb + up;
        Complex w2 = boundary_weight(u1, Complex(-g, -l2), Complex(g - 1.0, -l2));
        Complex w1 = boundary_weight(up, Complex(-g, -l1), Complex(g - 1.0, -l1));
        double decay = std::exp(z1 - x1) + std::exp(z1 - y) + std::exp(x1 - z2) +
                       std::exp(y - z2) + std::exp(z2 - x2) + std::exp(zp - y);
        Complex phase = kI * (l2 * (x1 + x2 + y - 2.0 * (z1 + z2)) + l1 * (y - 2.0 * zp));
        return w1 * w2 * std::exp(phase - decay);
    }
};

}  // namespace

ComplexEstimate psi_gg(const SpectralVector& lam, const PositionVector& x,
                       const ModelParams& params, const QuadratureBudget& budget, GgMode mode) {
    const std::size_t n = lam.size();
    if (x.size() != n) throw ShapeMismatch("psi_gg: |x| != |lam|");
    check_real(lam, "psi_gg");
    if (n == 1) return psi_gg_n1(lam[0].real(), x[0], params, budget);
    if (n != 2) throw DimensionUnsupported("psi_gg: n <= 2");

    GgN2 f{lam[0].real(), lam[1].real(), x[0], x[1], std::log(params.beta), params.g, params.beta};
    sf::GammaProduct pref;
    pref.mul_log(kI * (lam[0] + lam[1]) * std::log(2.0 * params.beta));
    pref.div_gamma(params.g - kI * lam[0]).div_gamma(params.g - kI * lam[1]);
    Complex c = pref.value();

    ComplexEstimate est;
    if (mode == GgMode::tensor) {
        // exploit the factorization at fixed y: the u' integral and the
        // (u1, z2) integral are independent
        QuadratureBudget inner = budget;
        inner.rel_tol = budget.rel_tol * 0.2;
        auto outer = [&](double y) -> Complex {
            auto a = quad::integrate_from(0.0, [&](double up) {
                double zp = f.lb + up;
                Complex w1 = boundary_weight(up, Complex(-f.g, -f.l1), Complex(f.g - 1.0, -f.l1));
                return w1 * std::exp(kI * f.l1 * (y - 2.0 * zp) - std::exp(zp - y));
            }, inner, f.g - 1.0);
            auto b = quad::integrate_nd(
                [&](const std::vector<double>& v) {
                    double u1 = v[0], z2 = v[1], z1 = f.lb + u1;
                    Complex w2 =
                        boundary_weight(u1, Complex(-f.g, -f.l2), Complex(f.g - 1.0, -f.l2));
                    double decay = std::exp(z1 - f.x1) + std::exp(z1 - y) + std::exp(f.x1 - z2) +
                                   std::exp(y - z2) + std::exp(z2 - f.x2);
                    return w2 * std::exp(kI * f.l2 * (f.x1 + f.x2 + y - 2.0 * (z1 + z2)) - decay);
                },
                {quad::Interval::from(0.0), quad::Interval::whole()}, inner);
            return a.value * b.value;
        };
        est = quad::integrate_line(outer, budget);
    } else {
        std::vector<quad::McCoordinate> prop(4);
        prop[0] = quad::McCoordinate::offset_scale(std::max(0.8, x[0] - f.lb));  // u1
        prop[1].centers = {x[1]};                                                // z2
        prop[1].scale = 1.5;
        prop[2].centers = {x[1]};                                                // y
        prop[2].scale = 2.5;
        prop[3] = quad::McCoordinate::offset_scale(std::max(0.8, x[1] - f.lb));  // u'
        est = quad::integrate_mc_adaptive([&](const std::vector<double>& v) { return f(v); }, prop,
                                          budget);
    }
    est.value *= c;
    est.err *= std::abs(c);
    return est;
}

Complex kernel_k1(const SpectralVector& lam, const SpectralVector& gam, const ModelParams& params) {
    const std::size_t n = gam.size();
    sf::GammaProduct p;
    p.mul_log(-kI * sum(gam) * std::log(2.0 * params.beta));
    for (std::size_t j = 0; j < n; ++j)
        for (const Complex& l : lam) p.mul_gamma(kI * gam[j] + kI * l).mul_gamma(kI * gam[j] - kI * l);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) p.div_gamma(kI * gam[j] + kI * gam[k]);
    for (std::size_t j = 0; j < n; ++j) p.div_gamma(params.g + kI * gam[j]);
    return p.value();
}

Complex kernel_k2(const SpectralVector& lam, const SpectralVector& gam, const ModelParams& params) {
    const std::size_t n = gam.size();
    sf::GammaProduct p;
    p.mul_log(-kI * sum(gam) * std::log(2.0 * params.beta));
    for (std::size_t j = 0; j < n; ++j)
        for (const Complex& l : lam) p.mul_gamma(kI * gam[j] + kI * l).mul_gamma(kI * gam[j] - kI * l);
    for (std::size_t j = 0; j < n; ++j) p.mul_gamma(params.g - kI * gam[j]);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) p.div_gamma(kI * gam[j] + kI * gam[k]);
    for (const Complex& l : lam) p.div_gamma(params.g + kI * l).div_gamma(params.g - kI * l);
    return p.value();
}

namespace {

// fast two-spectral-parameter series for the inner wave function: the Gamma
// recurrence keeps it one gamma call per point
Complex phi_series_n2_fast(double l1, double l2, double x1, double x2, double rel_tol) {
    auto branch = [&](double a1, double a2) -> Complex {
        Complex w = kI * (a2 - a1);
        Complex coeff = sf::gamma(w);
        Complex dec = std::exp(-(x2 - x1));
        Complex term = coeff * std::exp(kI * (a1 * x1 + a2 * x2));
        Complex sum = term;
        for (int a = 0; a < 400; ++a) {
            term *= -dec / ((static_cast<double>(a) + 1.0) * (w - static_cast<double>(a) - 1.0));
            sum += term;
            if (std::abs(term) < rel_tol * std::abs(sum)) return sum;
        }
        throw NotConverged("phi_series_n2_fast");
    };
    return branch(l1, l2) + branch(l2, l1);
}

}  // namespace

namespace {

Complex phi_on_contour(const std::vector<Complex>& gam, const PositionVector& x, double eps,
                       const QuadratureBudget& budget) {
    // common imaginary part -eps comes out as a plane-wave factor
    const std::size_t n = gam.size();
    if (n == 1) return std::exp(kI * gam[0] * x[0]);
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = gam[k].real();
    double pref = std::exp(eps * sum(x));
    if (n == 2) {
        double min_gap = std::abs(t[0] - t[1]);
        if (gl::in_gl_zone(x, 1.0) && min_gap > 0.05)
            return pref * phi_series_n2_fast(t[0], t[1], x[0], x[1], 1e-11);
        SpectralVector tc(t.begin(), t.end());
        return pref * gl::phi_mb(tc, x, budget).value;
    }
    return pref * gl::phi_flexible(t, x, budget);
}

ComplexEstimate psi_mb_common(const SpectralVector& lam, const PositionVector& x,
                              const ModelParams& params, const QuadratureBudget& budget,
                              double epsilon, bool second_kind) {
    const std::size_t n = lam.size();
    if (x.size() != n) throw ShapeMismatch("psi_mb: |x| != |lam|");
    if (n > 2) throw DimensionUnsupported("psi_mb: n <= 2");
    double mi = max_abs_imag(lam);
    double eps = epsilon;
    if (eps <= 0.0) {
        eps = std::max(0.5, 1.2 * mi);
        if (second_kind) {
            eps = std::min(eps, 0.9 * params.g);
        }
    }
    if (!(eps > mi))
        throw ContourViolation("psi_mb: contour depth must exceed max |Im lambda|");
    if (second_kind && !(eps < params.g))
        throw ContourViolation("psi_mb2: contour depth must stay below g");

    QuadratureBudget inner = budget;
    inner.rel_tol = std::max(budget.rel_tol * 0.1, 1e-12);

    quad::ContourSpec spec;
    spec.dim = static_cast<int>(n);
    spec.offsets.assign(n, eps);
    // net decay is at least e^{-pi |t|} per variable along the slowest ray
    spec.radius = (n == 1) ? 18.0 : 11.0;
    spec.radius += max_abs_imag(lam);

    Complex lead;  // K2 carries the lambda-only normalization
    if (second_kind) {
        sf::GammaProduct lp;
        for (const Complex& l : lam) lp.div_gamma(params.g + kI * l).div_gamma(params.g - kI * l);
        lead = lp.value();
    } else {
        lead = 1.0;
    }

    // everything that depends on a single gamma_j is cached per axis value
    auto axis_factor = [&](Complex gj) -> Complex {
        sf::GammaProduct p;
        p.mul_log(-kI * gj * std::log(2.0 * params.beta));
        for (const Complex& l : lam) p.mul_gamma(kI * gj + kI * l).mul_gamma(kI * gj - kI * l);
        if (second_kind)
            p.mul_gamma(params.g - kI * gj);
        else
            p.div_gamma(params.g + kI * gj);
        return p.value();
    };
    auto cache = std::make_shared<std::unordered_map<std::uint64_t, Complex>>();
    auto axis_cached = [axis_factor, cache](Complex gj) -> Complex {
        std::uint64_t key;
        double re = gj.real();
        std::memcpy(&key, &re, sizeof(key));
        auto it = cache->find(key);
        if (it != cache->end()) return it->second;
        Complex v = axis_factor(gj);
        cache->emplace(key, v);
        return v;
    };

    auto f = [&](const std::vector<Complex>& gam) -> Complex {
        Complex val = 1.0;
        for (std::size_t j = 0; j < n; ++j) val *= axis_cached(gam[j]);
        if (n == 2) {
            // mu-hat together with 1/G(i g1 + i g2); both entire in this form
            Complex d = gam[0] - gam[1];
            val *= d * std::sinh(M_PI * d) / M_PI / (2.0 * std::pow(2.0 * M_PI, 2));
            val /= sf::gamma(kI * gam[0] + kI * gam[1]);
        } else {
            val *= gl::gl_measure(SpectralVector(gam));
        }
        return val * phi_on_contour(gam, x, eps, inner);
    };
    auto est = quad::integrate_contour(f, spec, budget);
    double expo = (second_kind ? -1.0 : 1.0) * params.beta * std::exp(-x[0]);
    Complex c = lead * std::exp(expo);
    est.value *= c;
    est.err *= std::abs(c);
    return est;
}

}  // namespace

ComplexEstimate psi_mb1(const SpectralVector& lam, const PositionVector& x,
                        const ModelParams& params, const QuadratureBudget& budget, double epsilon) {
    return psi_mb_common(lam, x, params, budget, epsilon, false);
}

ComplexEstimate psi_mb2(const SpectralVector& lam, const PositionVector& x,
                        const ModelParams& params, const QuadratureBudget& budget, double epsilon) {
    return psi_mb_common(lam, x, params, budget, epsilon, true);
}

Complex bc_measure(const SpectralVector& lam, const ModelParams& params) {
    const std::size_t n = lam.size();
    // 1/(G(w) G(-w)) = -w sin(pi w)/pi, entire
    auto s = [](Complex w) { return -w * std::sin(M_PI * w) / M_PI; };
    double nfact = 1.0;
    for (std::size_t k = 2; k <= n; ++k) nfact *= static_cast<double>(k);
    Complex out = 1.0 / (nfact * std::pow(4.0 * M_PI, static_cast<double>(n)));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k)
            out *= s(kI * (lam[j] - lam[k])) * s(kI * (lam[j] + lam[k]));
    for (std::size_t j = 0; j < n; ++j) {
        out *= sf::gamma(params.g + kI * lam[j]) * sf::gamma(params.g - kI * lam[j]);
        out *= s(2.0 * kI * lam[j]);
    }
    return out;
}

Complex hc_coeff_bc(const BCSeriesIndex& B, const SpectralVector& lam, const ModelParams& params) {
    const int n = B.n;
    if (static_cast<int>(lam.size()) != n) throw ShapeMismatch("hc_coeff_bc: lambda size mismatch");
    sf::GammaProduct acc;
    double sign = 1.0;
    double factorials = 1.0;

    // c_B^1
    for (int k = 1; k <= n; ++k) {
        int bkk = B.bk[static_cast<std::size_t>(k - 1)];
        if (bkk % 2 == 1) sign = -sign;
        for (int m = 2; m <= bkk; ++m) factorials *= m;
        Complex lk = lam[static_cast<std::size_t>(k - 1)];
        acc.mul_gamma(2.0 * kI * lk - static_cast<double>(bkk));
        acc.div_gamma(kI * lk + params.g - static_cast<double>(bkk));
    }
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
            if (j == i) continue;
            Complex li = lam[static_cast<std::size_t>(i - 1)], lj = lam[static_cast<std::size_t>(j - 1)];
            double bi = B.bk[static_cast<std::size_t>(i - 1)], bj = B.bk[static_cast<std::size_t>(j - 1)];
            acc.mul_gamma(kI * (li + lj) - bi);
            acc.mul_gamma(kI * (li - lj) - bi);
            acc.div_gamma(kI * (li - lj) - bi + bj);
        }
    for (int i = 2; i <= n; ++i)
        for (int j = 1; j < i; ++j) {
            Complex li = lam[static_cast<std::size_t>(i - 1)], lj = lam[static_cast<std::size_t>(j - 1)];
            acc.div_gamma(kI * (li + lj) - static_cast<double>(B.bk[static_cast<std::size_t>(i - 1)]) -
                          static_cast<double>(B.bk[static_cast<std::size_t>(j - 1)]));
        }

    // c_B^k, k = 2..n
    for (int k = 2; k <= n; ++k)
        for (int i = 1; i <= k - 1; ++i) {
            int bki = B.at(k, i);
            if (bki % 2 == 1) sign = -sign;
            for (int m = 2; m <= bki; ++m) factorials *= m;
            for (int j = 1; j <= k; ++j) {
                if (j == i) continue;
                acc.mul_gamma(kI * (lam[static_cast<std::size_t>(j - 1)] - lam[static_cast<std::size_t>(i - 1)]) -
                              static_cast<double>(B.q(k, i)) + static_cast<double>(B.q(k + 1, j)));
            }
            for (int j = 1; j <= k - 1; ++j) {
                if (j == i) continue;
                acc.div_gamma(kI * (lam[static_cast<std::size_t>(j - 1)] - lam[static_cast<std::size_t>(i - 1)]) -
                              static_cast<double>(B.q(k, i)) + static_cast<double>(B.q(k, j)));
            }
        }
    return sign / factorials * acc.value();
}

namespace {

// derivative of exp(sum nu_k x_k + q), q = beta e^{-x_1}: polynomials in q
std::vector<Complex> apply_d1(const std::vector<Complex>& poly, Complex nu1) {
    std::vector<Complex> out(poly.size() + 1, Complex(0.0, 0.0));
    for (std::size_t m = 0; m < poly.size(); ++m) {
        out[m] += (nu1 - static_cast<double>(m)) * poly[m];
        out[m + 1] -= poly[m];
    }
    return out;
}

struct BcBranch {
    ComplexEstimate est;
};

ComplexEstimate psi_series_branch(const SpectralVector& lam, const PositionVector& x,
                                  const ModelParams& params, const std::vector<int>& deriv,
                                  int max_degree, const QuadratureBudget& budget) {
    const int n = static_cast<int>(lam.size());
    const int slots = n * (n - 1) / 2 + n;
    const double l2b = std::log(2.0 * params.beta);
    const double q0 = params.beta * std::exp(-x[0]);
    ComplexEstimate out;
    Complex total = 0.0;
    double last_shell = 0.0;
    BCSeriesIndex B;
    B.n = n;
    for (int N = 0; N <= max_degree; ++N) {
        Complex shell = 0.0;
        double shell_abs = 0.0;
        auto emit = [&](const std::vector<int>& idx) {
            B.bij.assign(idx.begin(), idx.begin() + n * (n - 1) / 2);
            B.bk.assign(idx.begin() + n * (n - 1) / 2, idx.end());
            Complex c = hc_coeff_bc(B, lam, params);
            // exponent sum_k nu_k x_k + const + q, with
            // nu_k = i lam_k - b_k + sum_{i>k} b_ik - sum_{j<k} b_kj
            std::vector<Complex> nu(static_cast<std::size_t>(n));
            Complex cst = 0.0;
            for (int k = 1; k <= n; ++k) {
                Complex m = kI * lam[static_cast<std::size_t>(k - 1)] -
                            static_cast<double>(B.bk[static_cast<std::size_t>(k - 1)]);
                for (int i = k + 1; i <= n; ++i) m += static_cast<double>(B.at(i, k));
                for (int j = 1; j < k; ++j) m -= static_cast<double>(B.at(k, j));
                nu[static_cast<std::size_t>(k - 1)] = m;
                // the tilde shift contributes -(i lam_k - b_k) ln(2 beta)
                cst -= (kI * lam[static_cast<std::size_t>(k - 1)] -
                        static_cast<double>(B.bk[static_cast<std::size_t>(k - 1)])) *
                       l2b;
            }
            Complex expo = cst + q0;
            for (int k = 0; k < n; ++k) expo += nu[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
            // derivative polynomial in q
            std::vector<Complex> poly{Complex(1.0, 0.0)};
            for (int d = 0; d < deriv[0]; ++d) poly = apply_d1(poly, nu[0]);
            Complex mult = 1.0;
            for (int k = 1; k < n; ++k)
                for (int d = 0; d < deriv[static_cast<std::size_t>(k)]; ++d)
                    mult *= nu[static_cast<std::size_t>(k)];
            Complex pq = 0.0;
            double qp = 1.0;
            for (std::size_t m = 0; m < poly.size(); ++m) {
                pq += poly[m] * qp;
                qp *= q0;
            }
            Complex term = c * std::exp(expo) * pq * mult;
            shell += term;
            shell_abs += std::abs(term);
            ++out.evals;
        };
        std::vector<int> cur;
        if (slots == 0) {
            if (N == 0) {
                std::vector<int> empty;
                emit(empty);
            }
        } else {
            std::function<void(int, int)> rec = [&](int slot, int left) {
                if (slot + 1 == slots) {
                    cur.push_back(left);
                    emit(cur);
                    cur.pop_back();
                    return;
                }
                for (int v = 0; v <= left; ++v) {
                    cur.push_back(v);
                    rec(slot + 1, left - v);
                    cur.pop_back();
                }
            };
            rec(0, N);
        }
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
        throw NotConverged("psi_series: shell contribution did not fall below tolerance");
    return out;
}

}  // namespace

ComplexEstimate psi_series_deriv(const SpectralVector& lam, const PositionVector& x,
                                 const ModelParams& params, const std::vector<int>& deriv,
                                 int max_degree, const QuadratureBudget& budget) {
    const int n = static_cast<int>(lam.size());
    if (n > 3) throw DimensionUnsupported("psi_series: n <= 3");
    if (static_cast<int>(x.size()) != n) throw ShapeMismatch("psi_series: |x| != |lam|");
    check_generic_bc(lam, "psi_series");
    ComplexEstimate out;
    for (const auto& w : signed_permutations(n)) {
        SpectralVector ls(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k)
            ls[static_cast<std::size_t>(k)] =
                static_cast<double>(w.eps[static_cast<std::size_t>(k)]) *
                lam[static_cast<std::size_t>(w.sigma[static_cast<std::size_t>(k)])];
        auto branch = psi_series_branch(ls, x, params, deriv, max_degree, budget);
        out.value += branch.value;
        out.err += branch.err;
        out.evals += branch.evals;
    }
    return out;
}

ComplexEstimate psi_series(const SpectralVector& lam, const PositionVector& x,
                           const ModelParams& params, int max_degree,
                           const QuadratureBudget& budget) {
    return psi_series_deriv(lam, x, params, std::vector<int>(lam.size(), 0), max_degree, budget);
}

Complex psi_asymptotic(const SpectralVector& lam, const PositionVector& x,
                       const ModelParams& params) {
    const int n = static_cast<int>(lam.size());
    check_generic_bc(lam, "psi_asymptotic");
    const double l2b = std::log(2.0 * params.beta);
    Complex total = 0.0;
    for (const auto& w : signed_permutations(n)) {
        SpectralVector ls(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k)
            ls[static_cast<std::size_t>(k)] =
                static_cast<double>(w.eps[static_cast<std::size_t>(k)]) *
                lam[static_cast<std::size_t>(w.sigma[static_cast<std::size_t>(k)])];
        sf::GammaProduct p;
        for (int k = 0; k < n; ++k) {
            p.mul_gamma(2.0 * kI * ls[static_cast<std::size_t>(k)]);
            p.div_gamma(kI * ls[static_cast<std::size_t>(k)] + params.g);
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                p.mul_gamma(kI * (ls[static_cast<std::size_t>(j)] + ls[static_cast<std::size_t>(i)]));
                p.mul_gamma(kI * (ls[static_cast<std::size_t>(j)] - ls[static_cast<std::size_t>(i)]));
            }
        Complex expo = 0.0;
        for (int k = 0; k < n; ++k)
            expo += kI * ls[static_cast<std::size_t>(k)] * (x[static_cast<std::size_t>(k)] - l2b);
        total += p.value() * std::exp(expo);
    }
    return total;
}

}  // namespace bctoda::bc
