#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bctoda/bc.hpp"
#include "bctoda/special.hpp"

using namespace bctoda;
using namespace bctoda::bc;

namespace {

double rel(Complex a, Complex b) { return std::abs(a - b) / std::abs(b); }

// one-particle wave function through the independent Whittaker oracle
Complex psi_oracle(double lam, double x, const ModelParams& p) {
    double z = 2.0 * p.beta * std::exp(-x);
    return std::exp(0.5 * x) / std::sqrt(2.0 * p.beta) *
           sf::whittaker_w(Complex(0.5 - p.g, 0), Complex(0, -lam), z);
}

}  // namespace

TEST_CASE("one-particle iterated integral matches the Whittaker oracle") {
    quad::QuadratureBudget b;
    for (double g : {0.7, 1.0, 1.6}) {
        ModelParams p = ModelParams::from_g(g, 0.5);
        for (double lam : {0.2, 0.85, 1.5})
            for (double x : {-1.0, 0.5, 2.0, 4.0}) {
                auto v = psi_gg({Complex(lam, 0)}, {x}, p, b);
                Complex want = psi_oracle(lam, x, p);
                CHECK(rel(v.value, want) < 1e-10);
            }
    }
}

TEST_CASE("raising kernel at n=1 and lambda=0 equals the ground-state value") {
    ModelParams p(0.25, 0.5);  // g = 1
    quad::QuadratureBudget b;
    auto k = bb_lambda_kernel(Complex(0, 0), {0.8}, {}, p, b);
    Complex want = psi_oracle(0.0, 0.8, p);
    CHECK(rel(k.value, want) < 1e-10);
}

TEST_CASE("raising kernel conjugation under lambda -> -lambda") {
    ModelParams p(0.3, 0.5);
    quad::QuadratureBudget b;
    auto plus = bb_lambda_kernel(Complex(0.6, 0), {0.2, 1.0}, {0.4}, p, b);
    auto minus = bb_lambda_kernel(Complex(-0.6, 0), {0.2, 1.0}, {0.4}, p, b);
    CHECK(std::abs(plus.value - std::conj(minus.value)) <= 3.0 * (plus.err + minus.err) + 1e-13);
}

TEST_CASE("transfer kernel reduction") {
    ModelParams p(0.25, 0.5);  // g = 1
    quad::QuadratureBudget b;
    Complex lam(0.0, -0.3);
    auto full = bbq_kernel(lam, {0.0}, {0.0}, p, b);
    auto red = bbq_reduced_kernel(lam, {0.0}, {0.0}, p, b);
    Complex want = sf::gamma(2.0 * kI * lam) * red.value;
    CHECK(std::abs(full.value - want) <=
          3.0 * (full.err + std::abs(sf::gamma(2.0 * kI * lam)) * red.err) +
              1e-10 * std::abs(want));

    // reduced kernel is symmetric in x <-> y
    auto r1 = bbq_reduced_kernel(lam, {0.4}, {-0.7}, p, b);
    auto r2 = bbq_reduced_kernel(lam, {-0.7}, {0.4}, p, b);
    CHECK(std::abs(r1.value - r2.value) <= 3.0 * (r1.err + r2.err) + 1e-13);

    CHECK_THROWS_AS(bbq_kernel(Complex(0.1, 0.2), {0.0}, {0.0}, p, b), ParameterDomainError);
}

TEST_CASE("spectral kernels") {
    ModelParams p(0.25, 0.5);  // g = 1, 2 beta = 1
    // n=1, gamma = -i (i gamma = 1), lam = 0: K1 = G(1)^2 / G(2) = 1
    CHECK(rel(kernel_k1({Complex(0, 0)}, {Complex(0, -1)}, p), Complex(1, 0)) < 1e-13);
    // same point for K2 hits G(g - i gamma) = G(0)
    CHECK_THROWS_AS(kernel_k2({Complex(0, 0)}, {Complex(0, -1)}, p), PoleError);

    // frozen n=2 reference computed from the definition in log space
    ModelParams p2 = ModelParams::from_g(1.3, 0.5);
    SpectralVector lam{Complex(0.63, 0.11), Complex(-0.41, 0.07)};
    SpectralVector gam{Complex(0.37, -0.83), Complex(1.22, -0.95)};
    sf::GammaProduct ref;
    ref.mul_log(-kI * (gam[0] + gam[1]) * std::log(1.0));
    for (auto& gj : gam)
        for (auto& lk : lam) ref.mul_gamma(kI * gj + kI * lk).mul_gamma(kI * gj - kI * lk);
    ref.div_gamma(kI * gam[0] + kI * gam[1]);
    for (auto& gj : gam) ref.div_gamma(p2.g + kI * gj);
    CHECK(rel(kernel_k1(lam, gam, p2), ref.value()) < 1e-12);
}

TEST_CASE("contour representations at n=1 match the oracle and each other") {
    quad::QuadratureBudget b;
    ModelParams p = ModelParams::from_g(1.3, 0.5);
    for (double lam : {0.35, 0.9})
        for (double x : {-0.5, 0.6, 2.5}) {
            auto m1 = psi_mb1({Complex(lam, 0)}, {x}, p, b);
            auto m2 = psi_mb2({Complex(lam, 0)}, {x}, p, b);
            Complex want = psi_oracle(lam, x, p);
            CHECK(rel(m1.value, want) < 1e-9);
            CHECK(std::abs(m1.value - m2.value) <=
                  3.0 * (m1.err + m2.err) + 1e-9 * std::abs(m1.value));
        }
}

TEST_CASE("measure at frozen point and symmetry") {
    ModelParams p(0.25, 0.5);  // g = 1
    CHECK(rel(bc_measure({Complex(1, 0)}, p), Complex(3.6898333277790746985, 0)) <
          1e-12);
    CHECK(std::abs(bc_measure({Complex(0, 0)}, p)) < 1e-300);
    ModelParams p2 = ModelParams::from_g(1.3, 0.5);
    SpectralVector l2{Complex(0.7, 0), Complex(-0.4, 0)};
    SpectralVector l2w{Complex(0.4, 0), Complex(0.7, 0)};
    CHECK(rel(bc_measure(l2, p2), bc_measure(l2w, p2)) < 1e-12);
}

TEST_CASE("series coefficients") {
    ModelParams p(0.25, 0.5);  // g = 1
    // n=1, b=0: G(2 i lam)/G(i lam + g)
    BCSeriesIndex B;
    B.n = 1;
    B.bij = {};
    B.bk = {0};
    SpectralVector lam{Complex(0.0, -0.5)};  // i lam = 1/2
    // G(1)/G(3/2) = 2/sqrt(pi)
    CHECK(rel(hc_coeff_bc(B, lam, p), Complex(2.0 / std::sqrt(M_PI), 0)) < 1e-13);

    // n=2 frozen reference from an independent transcription at 35 digits
    ModelParams p2 = ModelParams::from_g(1.3, 0.5);
    BCSeriesIndex B2;
    B2.n = 2;
    B2.bij = {1};
    B2.bk = {2, 1};
    SpectralVector l2{Complex(0.57, 0), Complex(-0.23, 0)};
    Complex got = hc_coeff_bc(B2, l2, p2);
    CHECK(rel(got, Complex(-0.056847647297065018151, 0.066746769430318289432)) < 1e-11);
}

TEST_CASE("one-particle series matches the oracle") {
    quad::QuadratureBudget b;
    ModelParams p = ModelParams::from_g(1.3, 0.5);
    for (double lam : {0.35, 1.1})
        for (double x : {0.5, 1.5, 3.0}) {
            auto s = psi_series({Complex(lam, 0)}, {x}, p, 80, b);
            CHECK(rel(s.value, psi_oracle(lam, x, p)) < 1e-9);
        }
    CHECK_THROWS_AS(psi_series({Complex(0.0, 0)}, {1.0}, p, 10, b), DegenerateSpectrum);
}

TEST_CASE("two-particle series agrees with the contour representation") {
    quad::QuadratureBudget b;
    ModelParams p = ModelParams::from_g(1.3, 0.5);
    SpectralVector lam{Complex(0.5, 0), Complex(0.2, 0)};
    PositionVector x{2.0, 4.5};
    auto s = psi_series(lam, x, p, 60, b);
    auto m = psi_mb1(lam, x, p, b);
    CHECK(rel(s.value, m.value) < 1e-6);
}

TEST_CASE("monte-carlo two-particle representation") {
    quad::QuadratureBudget b;
    b.mc_samples = 2000000;
    ModelParams p = ModelParams::from_g(1.0, 0.5);
    SpectralVector lam{Complex(0.5, 0), Complex(0.2, 0)};
    PositionVector x{0.3, 1.1};
    auto gg = psi_gg(lam, x, p, b);
    auto mb = psi_mb1(lam, x, p, b);
    CHECK(rel(gg.value, mb.value) < 2e-3);
    // reality for real spectral parameters
    CHECK(std::abs(gg.value.imag()) <= 3.0 * gg.err);
}

TEST_CASE("two-particle tensor representation at relaxed tolerance") {
    quad::QuadratureBudget b;
    b.rel_tol = 1e-6;
    ModelParams p = ModelParams::from_g(1.0, 0.5);
    SpectralVector lam{Complex(0.5, 0), Complex(0.2, 0)};
    PositionVector x{0.3, 1.1};
    auto gg = psi_gg(lam, x, p, b, GgMode::tensor);
    auto mb = psi_mb1(lam, x, p, b);
    CHECK(rel(gg.value, mb.value) < 1e-4);
}

TEST_CASE("asymptotic sum and decay of the remainder") {
    quad::QuadratureBudget b;
    ModelParams p = ModelParams::from_g(1.3, 0.5);
    // n=1 closed form
    SpectralVector lam{Complex(0.8, 0)};
    double xt = 3.0 + std::log(2.0 * p.beta);
    Complex as = psi_asymptotic(lam, {xt}, p);
    sf::GammaProduct t1;
    t1.mul_gamma(2.0 * kI * lam[0]).div_gamma(kI * lam[0] + p.g);
    Complex want = t1.value() * std::exp(kI * lam[0] * 3.0);
    want += std::conj(want);
    CHECK(rel(as, want) < 1e-13);
    // reality for real lambda
    CHECK(std::abs(as.imag()) < 1e-13 * std::abs(as));

    // |Psi - Psi_as| decreases over nested boxes
    SpectralVector l2{Complex(0.9, 0), Complex(0.4, 0)};
    double prev = 1e300;
    for (double m : {1.0, 2.0, 3.0}) {
        PositionVector x{m, 2.0 * m};
        auto full = psi_mb1(l2, x, p, b);
        Complex as2 = psi_asymptotic(l2, x, p);
        double diff = std::abs(full.value - as2);
        CHECK(diff < prev);
        prev = diff;
    }
}

TEST_CASE("signed permutation symmetry and reality at n=1") {
    quad::QuadratureBudget b;
    ModelParams p = ModelParams::from_g(1.0, 0.5);
    auto plus = psi_gg({Complex(0.7, 0)}, {0.9}, p, b);
    auto minus = psi_gg({Complex(-0.7, 0)}, {0.9}, p, b);
    CHECK(std::abs(plus.value - minus.value) <= 3.0 * (plus.err + minus.err) + 1e-12);
    CHECK(std::abs(plus.value.imag()) <= 3.0 * plus.err + 1e-13);
}

TEST_CASE("rapid decay into the forbidden region") {
    quad::QuadratureBudget b;
    ModelParams p = ModelParams::from_g(1.0, 0.5);
    double lb = std::log(p.beta);
    auto inside = psi_gg({Complex(0.5, 0)}, {lb + 4.0}, p, b);
    auto outside = psi_gg({Complex(0.5, 0)}, {lb - 4.0}, p, b);
    CHECK(std::abs(outside.value) <= 1e-3 * std::abs(inside.value));
}
