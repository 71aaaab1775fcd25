#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bctoda/gl.hpp"
#include "bctoda/special.hpp"

using namespace bctoda;
using namespace bctoda::gl;

namespace {
double rel(Complex a, Complex b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_CASE("kernels at frozen points") {
    // n=1: empty sums leave the plane wave
    CHECK(rel(lambda_kernel(Complex(2, 0), {0.5}, {}), std::exp(Complex(0, 1))) < 1e-15);
    // n=2 at the origin
    CHECK(rel(lambda_kernel(Complex(0, 0), {0.0, 0.0}, {0.0}), Complex(std::exp(-2.0), 0)) <
          1e-15);
    // frozen 30-digit reference
    CHECK(rel(lambda_kernel(Complex(1, 0), {1.0, -1.0}, {0.0}),
              Complex(0.0043544208747222522797, 0.0)) < 1e-14);

    CHECK(rel(q_kernel(Complex(0, 0), {0.0}, {0.0}), Complex(std::exp(-1.0), 0)) < 1e-15);
    // |q_kernel| independent of real lam
    double m1 = std::abs(q_kernel(Complex(0.3, 0), {0.1}, {0.7}));
    double m2 = std::abs(q_kernel(Complex(2.9, 0), {0.1}, {0.7}));
    CHECK(m1 == doctest::Approx(m2).epsilon(1e-14));
    CHECK(rel(q_kernel(Complex(0.5, 0), {0.2, -0.3}, {0.1, 0.4}),
              Complex(0.043314294326675999224, -0.013398681361501334382)) < 1e-14);

    CHECK_THROWS_AS(lambda_kernel(Complex(0, 0), {0.0, 0.0}, {0.0, 0.0}), ShapeMismatch);
}

TEST_CASE("spectral measure") {
    CHECK(rel(gl_measure({Complex(0.37, 0)}), Complex(1.0 / (2.0 * M_PI), 0)) < 1e-15);
    CHECK(rel(gl_measure({Complex(1, 0), Complex(0, 0)}),
              Complex(0.046558070630080551108, 0)) < 1e-14);
    CHECK(std::abs(gl_measure({Complex(0.8, 0), Complex(0.8, 0)})) == 0.0);
}

TEST_CASE("series coefficient c_A") {
    // A = 0 collapses to prod_{i<j} Gamma(i(lam_j - lam_i))
    SpectralVector lam{Complex(0.4, 0), Complex(-0.3, 0), Complex(0.9, 0)};
    GLSeriesIndex A;
    A.n = 3;
    A.a = {0, 0, 0};
    sf::GammaProduct want;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) want.mul_gamma(kI * (lam[j] - lam[i]));
    CHECK(rel(hc_coeff_gl(A, lam), want.value()) < 1e-13);

    // a21 = 1, the rest 0: the three-variable display reduces to
    // -G(i(l2-l1)-1) G(i(l3-l1)) G(i(l3-l2))
    A.a = {1, 0, 0};
    auto G = [](Complex z) { return sf::gamma(z); };
    Complex l1 = lam[0], l2 = lam[1], l3 = lam[2];
    Complex disp = -G(kI * (l2 - l1) - 1.0) * G(kI * (l3 - l1)) * G(kI * (l3 - l2));
    CHECK(rel(hc_coeff_gl(A, lam), disp) < 1e-12);
}

TEST_CASE("one-particle wave function is the plane wave") {
    quad::QuadratureBudget b;
    SpectralVector lam{Complex(2.0, 0)};
    auto v = phi_gg(lam, {0.0}, b);
    CHECK(rel(v.value, Complex(1, 0)) < 1e-14);
    auto s = phi_series(lam, {0.7}, 10, b);
    CHECK(rel(s.value, std::exp(Complex(0, 1.4))) < 1e-13);
}

TEST_CASE("two-particle evaluators agree") {
    quad::QuadratureBudget b;
    SpectralVector lam{Complex(0.7, 0), Complex(-0.4, 0)};
    PositionVector x{0.0, 0.8};
    auto vgg = phi_gg(lam, x, b);
    auto vmb = phi_mb(lam, x, b);
    CHECK(std::abs(vgg.value - vmb.value) <=
          3.0 * (vgg.err + vmb.err) + 1e-10 * std::abs(vmb.value));

    PositionVector xz{-1.0, 3.0};
    SpectralVector lz{Complex(0.6, 0), Complex(-0.3, 0)};
    auto vs = phi_series(lz, xz, 60, b);
    auto vm2 = phi_mb(lz, xz, b);
    CHECK(rel(vs.value, vm2.value) < 1e-8);
}

TEST_CASE("shift covariance") {
    quad::QuadratureBudget b;
    SpectralVector lam{Complex(0.5, 0), Complex(-0.2, 0)};
    PositionVector x{0.3, 1.1};
    double rho = 0.37;
    SpectralVector shifted{lam[0] + rho, lam[1] + rho};
    auto base = phi_gg(lam, x, b);
    auto shift = phi_gg(shifted, x, b);
    Complex want = std::exp(kI * rho * (x[0] + x[1])) * base.value;
    CHECK(std::abs(shift.value - want) <= 3.0 * (shift.err + base.err) + 1e-12);

    auto bm = phi_mb(lam, x, b);
    auto sm = phi_mb(shifted, x, b);
    CHECK(std::abs(sm.value - std::exp(kI * rho * (x[0] + x[1])) * bm.value) <=
          3.0 * (sm.err + bm.err) + 1e-12);

    auto bs = phi_series(lam, {0.3, 2.1}, 60, b);
    auto ss = phi_series(shifted, {0.3, 2.1}, 60, b);
    CHECK(rel(ss.value, std::exp(kI * rho * 2.4) * bs.value) < 1e-9);
}

TEST_CASE("permutation symmetry of the contour representation") {
    quad::QuadratureBudget b;
    PositionVector x{0.2, 1.0};
    auto a1 = phi_mb({Complex(0.9, 0), Complex(-0.5, 0)}, x, b);
    auto a2 = phi_mb({Complex(-0.5, 0), Complex(0.9, 0)}, x, b);
    CHECK(std::abs(a1.value - a2.value) <= 3.0 * (a1.err + a2.err) + 1e-12 * std::abs(a1.value));

    PositionVector x3{-0.5, 0.4, 1.3};
    auto b1 = phi_mb({Complex(0.8, 0), Complex(-0.6, 0), Complex(0.1, 0)}, x3, b);
    auto b2 = phi_mb({Complex(0.1, 0), Complex(0.8, 0), Complex(-0.6, 0)}, x3, b);
    CHECK(std::abs(b1.value - b2.value) <= 3.0 * (b1.err + b2.err) + 1e-8 * std::abs(b1.value));
}

TEST_CASE("reversal symmetry") {
    quad::QuadratureBudget b;
    SpectralVector lam{Complex(0.7, 0), Complex(-0.4, 0)};
    SpectralVector neg{Complex(-0.7, 0), Complex(0.4, 0)};
    PositionVector x{0.1, 0.9}, xr{-0.9, -0.1};
    auto v1 = phi_mb(lam, x, b);
    auto v2 = phi_mb(neg, xr, b);
    CHECK(std::abs(v1.value - v2.value) <= 3.0 * (v1.err + v2.err) + 1e-12);
}

TEST_CASE("asymptotic coefficient matches the far-zone series") {
    SpectralVector lam{Complex(0.6, 0), Complex(-0.3, 0)};
    PositionVector far{-6.0, 6.0};
    quad::QuadratureBudget b;
    auto full = phi_series(lam, far, 40, b);
    Complex as = phi_asymptotic(lam, far);
    CHECK(rel(full.value, as) < 1e-5);
}

TEST_CASE("eigenvalue residual via termwise derivatives") {
    // (-d1^2 - d2^2 + 2 e^{x1-x2}) Phi = (l1^2 + l2^2) Phi
    quad::QuadratureBudget b;
    SpectralVector lam{Complex(0.6, 0), Complex(-0.3, 0)};
    PositionVector x{-0.5, 2.0};
    auto f = phi_series(lam, x, 60, b);
    auto d11 = phi_series_deriv(lam, x, {2, 0}, 60, b);
    auto d22 = phi_series_deriv(lam, x, {0, 2}, 60, b);
    Complex lhs = -d11.value - d22.value + 2.0 * std::exp(x[0] - x[1]) * f.value;
    Complex want = (lam[0] * lam[0] + lam[1] * lam[1]) * f.value;
    CHECK(std::abs(lhs - want) <= 1e-8 * std::abs(f.value));
}

TEST_CASE("degenerate spectrum is refused by the series") {
    quad::QuadratureBudget b;
    CHECK_THROWS_AS(phi_series({Complex(0.4, 0), Complex(0.4, 0)}, {0.0, 1.0}, 10, b),
                    DegenerateSpectrum);
    // the contour evaluator stays available there
    CHECK_NOTHROW(phi_mb({Complex(0.4, 0), Complex(0.4, 0)}, {0.0, 1.0}, b));
}

TEST_CASE("decay when the zone ordering is violated") {
    quad::QuadratureBudget b;
    SpectralVector lam{Complex(0.8, 0), Complex(-0.2, 0)};
    double prev = 1e300;
    for (double gap : {0.0, 2.0, 4.0}) {
        auto v = phi_mb(lam, {gap, -gap}, b);
        CHECK(std::abs(v.value) < prev);
        prev = std::abs(v.value);
    }
}
