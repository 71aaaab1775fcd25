#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "bctoda/types.hpp"

namespace bctoda::quad {

struct QuadratureBudget {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    long max_evals = 8'000'000;
    long mc_samples = 2'000'000;
    std::uint64_t rng_seed = 20240901;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
            throw ParameterDomainError("QuadratureBudget: tolerances must be positive");
        if (max_evals < 1 || mc_samples < 1)
            throw ParameterDomainError("QuadratureBudget: eval counts must be >= 1");
    }
};

struct ComplexEstimate {
    Complex value{0.0, 0.0};
    double err = 0.0;
    long evals = 0;
    bool budget_exceeded = false;
};

// One-dimensional domain; endpoints may be +-infinity.
struct Interval {
    double a;
    double b;
    static Interval whole();
    static Interval from(double a);
    static Interval upto(double b);
    static Interval finite(double a, double b);
};

using Fn1 = std::function<Complex(double)>;
using FnN = std::function<Complex(const std::vector<double>&)>;

// Double-exponential adaptive quadrature.  `endpoint_exponent` declares an
// algebraic singularity (t-a)^sigma, sigma > -1, at a finite left endpoint;
// the node placement already absorbs it, the hint only widens the node range.
ComplexEstimate integrate_1d(const Fn1& f, Interval dom, const QuadratureBudget& budget,
                             std::optional<double> endpoint_exponent = std::nullopt);

// Offset-form primitives: the integrand receives the distance from the finite
// endpoint, so singular factors can be evaluated without cancellation.
ComplexEstimate integrate_from(double a, const Fn1& f_of_offset, const QuadratureBudget& budget,
                               std::optional<double> endpoint_exponent = std::nullopt);
ComplexEstimate integrate_finite_from(double a, double length, const Fn1& f_of_offset,
                                      const QuadratureBudget& budget,
                                      std::optional<double> endpoint_exponent = std::nullopt);
ComplexEstimate integrate_line(const Fn1& f, const QuadratureBudget& budget);
ComplexEstimate integrate_finite_plain(double a, double b, const Fn1& f_of_x,
                                       const QuadratureBudget& budget);

// Per-coordinate hint for the Monte Carlo importance density: an equal-weight
// mixture over `centers`.  Whole-line coordinates propose center + s with s
// distributed by exp(s - e^s); positive offsets fold the same draw through
// u = exp(center + s), which is an exponential density with rate e^{-center}.
// Several centers cover window-shaped mass profiles.
struct McCoordinate {
    std::vector<double> centers{0.0};
    bool positive_offset = false;
    double scale = 1.0;  // stretches the base draw: t = center + scale * s

    static McCoordinate window(double lo, double hi, double step = 0.8) {
        McCoordinate c;
        c.centers.clear();
        for (double t = lo; t <= hi + 1e-9; t += step) c.centers.push_back(t);
        if (c.centers.empty()) c.centers.push_back(0.5 * (lo + hi));
        return c;
    }
    static McCoordinate offset_scale(double scale) {
        McCoordinate c;
        c.centers = {std::log(scale)};
        c.positive_offset = true;
        return c;
    }
};

// Tensor quadrature for d <= 4; Monte Carlo with the declared importance
// density for 5 <= d <= 9.  Domains for the MC path must be whole-line or
// (0, inf) offsets matching `mc_coords`.
ComplexEstimate integrate_nd(const FnN& f, const std::vector<Interval>& domains,
                             const QuadratureBudget& budget,
                             const std::vector<McCoordinate>& mc_coords = {});

// Plain importance-sampled Monte Carlo over the proposal coordinates.
ComplexEstimate integrate_mc(const FnN& f, const std::vector<McCoordinate>& coords,
                             const QuadratureBudget& budget);

// Importance sampling with separable grid adaptation layered on the base
// proposals: two pilot passes refine per-axis bin widths in the CDF variable
// of each base density, the remaining samples produce the estimate.
ComplexEstimate integrate_mc_adaptive(const FnN& f, const std::vector<McCoordinate>& coords,
                                      const QuadratureBudget& budget);

// Horizontal-line contours Im gamma_k = -offsets[k], Re gamma_k in [-R, R].
struct ContourSpec {
    int dim = 1;
    std::vector<double> offsets;
    double radius = 22.0;

    void validate() const {
        if (dim < 1 || static_cast<int>(offsets.size()) != dim)
            throw ParameterDomainError("ContourSpec: offsets size must equal dim");
        if (!(radius > 0.0)) throw ParameterDomainError("ContourSpec: radius must be positive");
    }
};

ComplexEstimate integrate_contour(const std::function<Complex(const std::vector<Complex>&)>& f,
                                  const ContourSpec& contour, const QuadratureBudget& budget);

// Deterministic counter-based uniform generator (SplitMix64 hash of the
// counter): identical seeds give bit-identical streams regardless of sharding.
class CounterRng {
   public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
    double unit(std::uint64_t counter) const;   // in (0, 1)
    double gumbel(std::uint64_t counter) const; // density exp(s - e^s)

   private:
    std::uint64_t seed_;
};

}  // namespace bctoda::quad
