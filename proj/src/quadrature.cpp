#include "bctoda/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bctoda::quad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHalfPi = 1.5707963267948966;

struct DeNode {
    double x;
    double w;
    bool usable;
};

// Trapezoid driver over the transformed variable t of a double-exponential
// rule.  Handles step refinement, dynamic range truncation and the standard
// delta^2/delta error model.
template <typename NodeFn>
ComplexEstimate de_driver(const Fn1& f, NodeFn node, const QuadratureBudget& budget) {
    ComplexEstimate out;
    const double tmax = 6.9;  // exp argument stays below overflow for all maps
    const double cut = std::min(budget.rel_tol, 1e-14) * 1e-3;

    double gross = 0.0;
    auto eval_term = [&](double t) -> Complex {
        DeNode n = node(t);
        if (!n.usable || n.w == 0.0) return Complex(0.0, 0.0);
        Complex fv = f(n.x);
        if (!std::isfinite(fv.real()) || !std::isfinite(fv.imag()))
            throw NotConverged("integrate: non-finite integrand value");
        ++out.evals;
        Complex term = fv * n.w;
        gross += std::abs(term);
        return term;
    };

    // level 0: step h0 over [-tmax, tmax] with early truncation
    const double h0 = 0.5;
    Complex sum = eval_term(0.0);
    bool aborted = false;
    for (int dir = -1; dir <= 1 && !aborted; dir += 2) {
        int quiet = 0;
        for (int k = 1; h0 * k <= tmax; ++k) {
            Complex term = eval_term(dir * h0 * k);
            sum += term;
            if (h0 * k >= 2.0 && std::abs(term) <= cut * (gross + 1e-300)) {
                if (++quiet >= 6) break;
            } else {
                quiet = 0;
            }
            if (out.evals > budget.max_evals) {
                aborted = true;
                break;
            }
        }
    }

    Complex prev = sum * h0;
    out.value = prev;
    out.err = std::abs(prev);
    if (aborted) {
        out.budget_exceeded = true;
        return out;
    }

    double h = h0;
    double prev_delta = kInf;
    for (int level = 1; level <= 12; ++level) {
        h *= 0.5;
        Complex odd(0.0, 0.0);
        for (int dir = -1; dir <= 1 && !aborted; dir += 2) {
            int quiet = 0;
            for (int k = 0; h + 2.0 * h * k <= tmax; ++k) {
                Complex term = eval_term(dir * (h + 2.0 * h * k));
                odd += term;
                if (h + 2.0 * h * k >= 2.0 && std::abs(term) <= cut * (gross + 1e-300)) {
                    if (++quiet >= 6) break;
                } else {
                    quiet = 0;
                }
                if (out.evals > budget.max_evals) {
                    aborted = true;
                    break;
                }
            }
        }
        if (aborted) {
            out.budget_exceeded = true;
            return out;  // keep the last complete level
        }
        Complex cur = 0.5 * prev + h * odd;
        double delta = std::abs(cur - prev);
        double scale = std::abs(cur);
        double err = delta;
        if (std::isfinite(prev_delta) && prev_delta > 0.0 && delta < prev_delta)
            err = delta * delta / prev_delta;
        out.value = cur;
        out.err = std::max(err, 5e-16 * scale);
        prev = cur;
        prev_delta = std::max(delta, 1e-300);
        if (level >= 2 && out.err <= std::max(budget.abs_tol, budget.rel_tol * scale)) return out;
    }
    return out;
}

}  // namespace

Interval Interval::whole() { return {-kInf, kInf}; }
Interval Interval::from(double a) { return {a, kInf}; }
Interval Interval::upto(double b) { return {-kInf, b}; }
Interval Interval::finite(double a, double b) { return {a, b}; }

ComplexEstimate integrate_from(double /*a*/, const Fn1& f, const QuadratureBudget& budget,
                               std::optional<double> /*sigma*/) {
    budget.validate();
    // exp-sinh: u = exp((pi/2) sinh t)
    auto node = [](double t) -> DeNode {
        double s = kHalfPi * std::sinh(t);
        if (std::abs(s) > 700.0) return {0.0, 0.0, false};
        double u = std::exp(s);
        return {u, kHalfPi * std::cosh(t) * u, true};
    };
    return de_driver(f, node, budget);
}

ComplexEstimate integrate_finite_from(double /*a*/, double length, const Fn1& f,
                                      const QuadratureBudget& budget,
                                      std::optional<double> /*sigma*/) {
    budget.validate();
    if (!(length > 0.0)) throw ParameterDomainError("integrate_finite_from: length must be > 0");
    // tanh-sinh written through the logistic function so the offset from the
    // left endpoint never suffers cancellation
    auto node = [length](double t) -> DeNode {
        double s = M_PI * std::sinh(t);
        if (std::abs(s) > 700.0) return {0.0, 0.0, false};
        double es = std::exp(-std::abs(s));
        double sig = (s >= 0.0) ? 1.0 / (1.0 + es) : es / (1.0 + es);
        double u = length * sig;
        if (u == 0.0 || u >= length) return {0.0, 0.0, false};
        // sig*(1-sig) = es/(1+es)^2 independently of the sign of s
        double w = length * M_PI * std::cosh(t) * es / ((1.0 + es) * (1.0 + es));
        return {u, w, true};
    };
    return de_driver(f, node, budget);
}

ComplexEstimate integrate_line(const Fn1& f, const QuadratureBudget& budget) {
    budget.validate();
    auto node = [](double t) -> DeNode {
        double s = kHalfPi * std::sinh(t);
        if (std::abs(s) > 700.0) return {0.0, 0.0, false};
        return {std::sinh(s), kHalfPi * std::cosh(t) * std::cosh(s), true};
    };
    return de_driver(f, node, budget);
}

ComplexEstimate integrate_finite_plain(double a, double b, const Fn1& f,
                                       const QuadratureBudget& budget) {
    budget.validate();
    // tanh-sinh over (a, b) without the midpoint split; for integrands that
    // are regular at both endpoints
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    auto node = [mid, half](double t) -> DeNode {
        double s = kHalfPi * std::sinh(t);
        if (std::abs(s) > 700.0) return {0.0, 0.0, false};
        double th = std::tanh(s);
        double x = mid + half * th;
        if (x <= mid - half || x >= mid + half) return {0.0, 0.0, false};
        double sech2 = 1.0 - th * th;
        return {x, half * kHalfPi * std::cosh(t) * sech2, true};
    };
    return de_driver(f, node, budget);
}

ComplexEstimate integrate_1d(const Fn1& f, Interval dom, const QuadratureBudget& budget,
                             std::optional<double> sigma) {
    bool a_inf = std::isinf(dom.a), b_inf = std::isinf(dom.b);
    if (a_inf && b_inf) return integrate_line(f, budget);
    if (!a_inf && b_inf) {
        double a = dom.a;
        return integrate_from(a, [&f, a](double u) { return f(a + u); }, budget, sigma);
    }
    if (a_inf && !b_inf) {
        double b = dom.b;
        return integrate_from(b, [&f, b](double u) { return f(b - u); }, budget, sigma);
    }
    if (!(dom.b > dom.a)) throw ParameterDomainError("integrate_1d: empty interval");
    double half = 0.5 * (dom.b - dom.a);
    QuadratureBudget hb = budget;
    hb.rel_tol = 0.5 * budget.rel_tol;
    hb.abs_tol = 0.5 * budget.abs_tol;
    double a = dom.a, b = dom.b;
    auto left = integrate_finite_from(a, half, [&f, a](double u) { return f(a + u); }, hb, sigma);
    auto right = integrate_finite_from(b, half, [&f, b](double u) { return f(b - u); }, hb, sigma);
    ComplexEstimate out;
    out.value = left.value + right.value;
    out.err = left.err + right.err;
    out.evals = left.evals + right.evals;
    out.budget_exceeded = left.budget_exceeded || right.budget_exceeded;
    return out;
}

namespace {

ComplexEstimate tensor_recursive(const FnN& f, const std::vector<Interval>& domains,
                                 std::vector<double>& point, std::size_t dim,
                                 const QuadratureBudget& budget, long* evals_left) {
    QuadratureBudget local = budget;
    local.max_evals = std::max<long>(1, *evals_left);
    double inner_err_max = 0.0;
    bool inner_budget_hit = false;
    auto slice = [&](double x) -> Complex {
        point[dim] = x;
        if (dim + 1 == domains.size()) {
            --*evals_left;
            return f(point);
        }
        QuadratureBudget inner = budget;
        inner.rel_tol = budget.rel_tol * 0.2;
        inner.abs_tol = budget.abs_tol * 0.2;
        auto est = tensor_recursive(f, domains, point, dim + 1, inner, evals_left);
        inner_err_max = std::max(inner_err_max, est.err);
        inner_budget_hit = inner_budget_hit || est.budget_exceeded;
        return est.value;
    };
    ComplexEstimate est;
    if (std::isfinite(domains[dim].a) && std::isfinite(domains[dim].b))
        est = integrate_finite_plain(domains[dim].a, domains[dim].b, slice, local);
    else
        est = integrate_1d(slice, domains[dim], local);
    // the refinement deltas plateau at the inner noise, so the driver estimate
    // already sees it; keep it as a floor only
    est.err = std::max(est.err, inner_err_max);
    est.budget_exceeded = est.budget_exceeded || inner_budget_hit || *evals_left <= 0;
    return est;
}

}  // namespace

ComplexEstimate integrate_nd(const FnN& f, const std::vector<Interval>& domains,
                             const QuadratureBudget& budget,
                             const std::vector<McCoordinate>& mc_coords) {
    budget.validate();
    std::size_t d = domains.size();
    if (d < 1 || d > 9) throw DimensionUnsupported("integrate_nd supports 1 <= d <= 9");
    if (d >= 5) {
        if (mc_coords.size() != d)
            throw ParameterDomainError("integrate_nd: d >= 5 needs one McCoordinate per dim");
        return integrate_mc(f, mc_coords, budget);
    }
    std::vector<double> point(d, 0.0);
    long evals_left = budget.max_evals;
    return tensor_recursive(f, domains, point, 0, budget, &evals_left);
}

double CounterRng::unit(std::uint64_t counter) const {
    std::uint64_t x = seed_ + 0x9E3779B97F4A7C15ULL * (counter + 1);
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::gumbel(std::uint64_t counter) const {
    return std::log(-std::log(unit(counter)));
}

namespace {

double gumbel_pdf(double s) { return std::exp(s - std::exp(s)); }

// mixture density of one coordinate at its sampled value
double mixture_pdf(const McCoordinate& c, double v) {
    double p = 0.0;
    if (c.positive_offset) {
        for (double ck : c.centers) {
            double theta = std::exp(-ck);
            p += theta * std::exp(-theta * v);
        }
    } else {
        for (double ck : c.centers) p += gumbel_pdf((v - ck) / c.scale) / c.scale;
    }
    return p / static_cast<double>(c.centers.size());
}

}  // namespace

ComplexEstimate integrate_mc(const FnN& f, const std::vector<McCoordinate>& coords,
                             const QuadratureBudget& budget) {
    budget.validate();
    const std::size_t d = coords.size();
    for (const auto& c : coords)
        if (c.centers.empty()) throw ParameterDomainError("integrate_mc: empty proposal");
    CounterRng rng(budget.rng_seed);
    std::vector<double> x(d);
    Complex sum(0.0, 0.0);
    double sum_sq = 0.0;
    const long n = budget.mc_samples;
    for (long i = 0; i < n; ++i) {
        double p = 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            std::uint64_t ctr = 2 * (static_cast<std::uint64_t>(i) * d + j);
            std::size_t k = 0;
            if (coords[j].centers.size() > 1)
                k = static_cast<std::size_t>(rng.unit(ctr) * static_cast<double>(coords[j].centers.size()));
            double s = rng.gumbel(ctr + 1);
            double ck = coords[j].centers[std::min(k, coords[j].centers.size() - 1)];
            x[j] = coords[j].positive_offset ? std::exp(ck + s) : ck + coords[j].scale * s;
            p *= mixture_pdf(coords[j], x[j]);
        }
        Complex fv = f(x);
        if (fv != Complex(0.0, 0.0)) {
            if (!std::isfinite(fv.real()) || !std::isfinite(fv.imag()))
                throw NotConverged("integrate_mc: non-finite integrand value");
            Complex w = fv / p;
            sum += w;
            sum_sq += std::norm(w);
        }
    }
    ComplexEstimate out;
    out.value = sum / static_cast<double>(n);
    double var = sum_sq / static_cast<double>(n) - std::norm(out.value);
    out.err = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
    out.evals = n;
    return out;
}

namespace {

// base maps between the sampling variable xi in (0,1) and the coordinate
struct BaseMap {
    const McCoordinate* c;

    // mixture sampling is awkward to invert, so the grid layer uses only the
    // first center; the mixture path stays available in integrate_mc
    double theta() const { return std::exp(-c->centers.front()); }

    double from_unit(double xi) const {
        if (c->positive_offset) return -std::log1p(-xi) / theta();
        // Gumbel CDF F(s) = 1 - exp(-e^s) around the center
        return c->centers.front() + c->scale * std::log(-std::log1p(-xi));
    }
    double pdf(double v) const {
        if (c->positive_offset) return theta() * std::exp(-theta() * v);
        return gumbel_pdf((v - c->centers.front()) / c->scale) / c->scale;
    }
};

struct VegasAxis {
    std::vector<double> edges;  // bins+1 ascending points in (0,1)

    explicit VegasAxis(int bins) {
        edges.resize(static_cast<std::size_t>(bins) + 1);
        for (int k = 0; k <= bins; ++k)
            edges[static_cast<std::size_t>(k)] = static_cast<double>(k) / bins;
    }
    int bins() const { return static_cast<int>(edges.size()) - 1; }

    void refine(std::vector<double>& weight) {
        const int nb = bins();
        // smooth and compress the per-bin importance, then equalize
        std::vector<double> r(static_cast<std::size_t>(nb));
        double total = 0.0;
        for (int k = 0; k < nb; ++k) {
            double a = weight[static_cast<std::size_t>(std::max(0, k - 1))];
            double b = weight[static_cast<std::size_t>(k)];
            double c = weight[static_cast<std::size_t>(std::min(nb - 1, k + 1))];
            r[static_cast<std::size_t>(k)] = std::pow((a + b + c) / 3.0 + 1e-300, 0.75);
            total += r[static_cast<std::size_t>(k)];
        }
        std::vector<double> ne(edges.size());
        ne.front() = 0.0;
        ne.back() = 1.0;
        double per = total / nb;
        int k = 0;
        double carry = r[0];
        for (int m = 1; m < nb; ++m) {
            double need = per;
            while (carry < need) {
                need -= carry;
                ++k;
                carry = r[static_cast<std::size_t>(k)];
            }
            carry -= need;
            double lo = edges[static_cast<std::size_t>(k)], hi = edges[static_cast<std::size_t>(k) + 1];
            // position inside source bin k after consuming its share
            ne[static_cast<std::size_t>(m)] =
                hi - (hi - lo) * (carry / r[static_cast<std::size_t>(k)]);
        }
        edges = std::move(ne);
    }
};

}  // namespace

namespace {

// van der Corput radical inverse in the given base
double radical_inverse(std::uint64_t i, unsigned base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

constexpr unsigned kHaltonBases[9] = {2, 3, 5, 7, 11, 13, 17, 19, 23};

}  // namespace

ComplexEstimate integrate_mc_adaptive(const FnN& f, const std::vector<McCoordinate>& coords,
                                      const QuadratureBudget& budget) {
    budget.validate();
    const std::size_t d = coords.size();
    if (d > 9) throw DimensionUnsupported("integrate_mc_adaptive: d <= 9");
    const int nb = 48;
    std::vector<VegasAxis> axes(d, VegasAxis(nb));
    std::vector<BaseMap> maps(d);
    for (std::size_t j = 0; j < d; ++j) maps[j].c = &coords[j];
    CounterRng rng(budget.rng_seed);

    const long total = budget.mc_samples;
    const long pilot = std::max<long>(20000, total / 10);

    std::vector<double> x(d);
    std::vector<int> bin_of(d);

    // grid-distribution sampling: v uniform in (0,1) -> coordinate and density
    auto draw = [&](std::size_t j, double v, double* pdf) {
        v = std::min(1.0 - 1e-15, std::max(1e-15, v));
        int k = std::min(nb - 1, static_cast<int>(v * nb));
        double frac = v * nb - k;
        double lo = axes[j].edges[static_cast<std::size_t>(k)];
        double hi = axes[j].edges[static_cast<std::size_t>(k) + 1];
        double xi = std::min(1.0 - 1e-16, std::max(1e-300, lo + (hi - lo) * frac));
        double t = maps[j].from_unit(xi);
        bin_of[j] = k;
        *pdf = maps[j].pdf(t) / (static_cast<double>(nb) * (hi - lo));
        return t;
    };

    // two pilot passes refine the grid
    std::uint64_t ctr = 0;
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<std::vector<double>> grid_weight(
            d, std::vector<double>(static_cast<std::size_t>(nb), 0.0));
        for (long i = 0; i < pilot; ++i) {
            double p = 1.0;
            for (std::size_t j = 0; j < d; ++j) {
                double pj;
                x[j] = draw(j, rng.unit(ctr++), &pj);
                p *= pj;
            }
            Complex fv = f(x);
            if (fv != Complex(0.0, 0.0)) {
                if (!std::isfinite(fv.real()) || !std::isfinite(fv.imag()))
                    throw NotConverged("integrate_mc_adaptive: non-finite integrand value");
                double w2 = std::norm(fv / p);
                for (std::size_t j = 0; j < d; ++j)
                    grid_weight[j][static_cast<std::size_t>(bin_of[j])] += w2;
            }
        }
        for (std::size_t j = 0; j < d; ++j) axes[j].refine(grid_weight[j]);
    }

    // final pass: shifted low-discrepancy points through the adapted grid;
    // independent shifts give the error estimate
    const int shifts = 8;
    const long per_shift = std::max<long>(1, (total - 2 * pilot) / shifts);
    Complex mean_total(0.0, 0.0);
    std::vector<Complex> means(static_cast<std::size_t>(shifts));
    for (int m = 0; m < shifts; ++m) {
        std::vector<double> shift(d);
        for (std::size_t j = 0; j < d; ++j)
            shift[j] = rng.unit(0xABCD0000u + static_cast<std::uint64_t>(m) * 64 + j);
        Complex sum(0.0, 0.0);
        for (long i = 0; i < per_shift; ++i) {
            double p = 1.0;
            for (std::size_t j = 0; j < d; ++j) {
                double v = radical_inverse(static_cast<std::uint64_t>(i) + 1, kHaltonBases[j]) +
                           shift[j];
                if (v >= 1.0) v -= 1.0;
                double pj;
                x[j] = draw(j, v, &pj);
                p *= pj;
            }
            Complex fv = f(x);
            if (fv != Complex(0.0, 0.0)) {
                if (!std::isfinite(fv.real()) || !std::isfinite(fv.imag()))
                    throw NotConverged("integrate_mc_adaptive: non-finite integrand value");
                sum += fv / p;
            }
        }
        means[static_cast<std::size_t>(m)] = sum / static_cast<double>(per_shift);
        mean_total += means[static_cast<std::size_t>(m)];
    }
    ComplexEstimate out;
    out.value = mean_total / static_cast<double>(shifts);
    double var = 0.0;
    for (const Complex& v : means) var += std::norm(v - out.value);
    var /= (shifts - 1);
    out.err = std::sqrt(var / shifts);
    out.evals = 2 * pilot + per_shift * shifts;
    return out;
}

ComplexEstimate integrate_contour(const std::function<Complex(const std::vector<Complex>&)>& f,
                                  const ContourSpec& contour, const QuadratureBudget& budget) {
    contour.validate();
    budget.validate();
    const int d = contour.dim;
    auto run = [&](double R) -> ComplexEstimate {
        std::vector<Interval> doms(static_cast<std::size_t>(d), Interval::finite(-R, R));
        auto g = [&](const std::vector<double>& t) -> Complex {
            std::vector<Complex> gam(static_cast<std::size_t>(d));
            for (int k = 0; k < d; ++k) gam[k] = Complex(t[k], -contour.offsets[k]);
            return f(gam);
        };
        return integrate_nd(g, doms, budget);
    };
    auto boundary_mag = [&](double R) -> double {
        double m = 0.0;
        std::vector<Complex> gam(static_cast<std::size_t>(d));
        const int probes = 9;
        for (int face = 0; face < d; ++face) {
            for (int side = -1; side <= 1; side += 2) {
                for (int p = 0; p <= probes; ++p) {
                    for (int j = 0; j < d; ++j) {
                        double tj = (j == face) ? side * R : (-R + 2.0 * R * p / probes);
                        gam[j] = Complex(tj, -contour.offsets[j]);
                    }
                    m = std::max(m, std::abs(f(gam)));
                }
            }
        }
        return m;
    };
    double R = (d >= 2) ? std::min(contour.radius, 14.0) : contour.radius;
    ComplexEstimate est = run(R);
    for (int attempt = 0; attempt < 3; ++attempt) {
        // each variable keeps at least one net gamma pair of e^{-pi |t| / 2} decay
        double tail = boundary_mag(R) * (4.0 / M_PI) * d * std::pow(2.0 * R, d - 1);
        if (tail < std::max(budget.abs_tol, budget.rel_tol * std::abs(est.value))) {
            est.err += tail;
            return est;
        }
        R *= 1.4;
        est = run(R);
    }
    throw ContourViolation("integrate_contour: truncation tail not bounded within budget");
}

}  // namespace bctoda::quad
