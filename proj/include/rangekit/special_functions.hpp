#pragma once

// Legendre polynomials, spherical Bessel functions, and Gauss-Legendre
// quadrature. Everything here is a pure function of its arguments.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace rangekit {

/// P_n(u) by the three-term recurrence (n+1)P_{n+1} = (2n+1)uP_n - nP_{n-1}.
inline double legendre_eval(int n, double u)
{
    if (n < 0) throw std::invalid_argument("legendre_eval: order must be nonnegative");
    if (std::abs(u) > 1.0) throw std::domain_error("legendre_eval: |u| must be <= 1");
    if (n == 0) return 1.0;
    double pm1 = 1.0;
    double p = u;
    for (int k = 1; k < n; ++k) {
        const double pp1 = ((2.0 * k + 1.0) * u * p - k * pm1) / (k + 1.0);
        pm1 = p;
        p = pp1;
    }
    return p;
}

/// Orthonormal-basis scale factor sqrt((2n+1)/2) for the Legendre family on [-1,1].
inline double legendre_scale(int n) { return std::sqrt((2.0 * n + 1.0) / 2.0); }

namespace detail {

// Power series around t = 0:
//   j_n(t) = t^n/(2n+1)!! * sum_k (-t^2/2)^k / (k! (2n+3)(2n+5)...(2n+2k+1))
// Used where the trig closed forms cancel catastrophically.
inline double spherical_bessel_series(int n, double t)
{
    double prefactor = 1.0;
    for (int k = 1; k <= n; ++k) prefactor *= t / (2.0 * k + 1.0);
    const double t2h = -0.5 * t * t;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= t2h / (k * (2.0 * n + 2.0 * k + 1.0));
        sum += term;
        if (std::abs(term) < std::numeric_limits<double>::epsilon() * std::abs(sum)) break;
    }
    return prefactor * sum;
}

// Miller's downward recurrence, normalized against j_0 or j_1 (whichever is
// larger, so a zero of j_0 cannot poison the scale).
inline double spherical_bessel_downward(int n, double t)
{
    const int start = n + 15 + static_cast<int>(std::ceil(std::abs(t)));
    double jp1 = 0.0;
    double j = std::numeric_limits<double>::min() * 1e16;
    double jn = 0.0;
    for (int k = start; k >= 0; --k) {
        const double jm1 = (2.0 * k + 3.0) / t * j - jp1;
        jp1 = j;
        j = jm1;
        if (k == n) jn = j;
        if (std::abs(j) > 1e250) { // rescale to dodge overflow
            j *= 1e-250;
            jp1 *= 1e-250;
            jn *= 1e-250;
        }
    }
    const double j0_true = std::sin(t) / t;
    const double j1_true = std::sin(t) / (t * t) - std::cos(t) / t;
    const double j0_rec = j;
    const double j1_rec = jp1;
    if (std::abs(j0_true) >= std::abs(j1_true)) return jn * (j0_true / j0_rec);
    return jn * (j1_true / j1_rec);
}

} // namespace detail

/// Spherical Bessel function of the first kind, j_n(t), stable for all t and
/// n >= 0: series for small arguments, upward recurrence where it is stable
/// (n < t), downward normalized recurrence otherwise.
inline double spherical_bessel_j(int n, double t)
{
    if (n < 0) throw std::invalid_argument("spherical_bessel_j: order must be nonnegative");
    if (t == 0.0) return n == 0 ? 1.0 : 0.0;
    const double sign = (t < 0.0 && n % 2 == 1) ? -1.0 : 1.0; // j_n(-t) = (-1)^n j_n(t)
    const double at = std::abs(t);

    if (at < std::max(1.0, 0.5 * n)) return sign * detail::spherical_bessel_series(n, at);
    if (n == 0) return sign * (std::sin(at) / at);
    const double j0 = std::sin(at) / at;
    const double j1 = std::sin(at) / (at * at) - std::cos(at) / at;
    if (n == 1) return sign * j1;
    if (n <= at) { // upward recurrence
        double jm1 = j0, j = j1;
        for (int k = 1; k < n; ++k) {
            const double jp1 = (2.0 * k + 1.0) / at * j - jm1;
            jm1 = j;
            j = jp1;
        }
        return sign * j;
    }
    return sign * detail::spherical_bessel_downward(n, at);
}

/// Gauss-Legendre nodes and weights on [-1, 1].
struct QuadratureRule {
    std::vector<double> nodes;   // strictly increasing, inside (-1, 1)
    std::vector<double> weights; // positive, summing to 2

    std::size_t order() const { return nodes.size(); }

    template <typename F>
    double integrate(F&& f) const
    {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

/// Nodes are the roots of P_order, found by Newton iteration from the
/// Chebyshev-angle initial guesses; weights w = 2 / ((1-x^2) P'^2).
inline QuadratureRule gauss_legendre(int order)
{
    if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    const std::size_t n = static_cast<std::size_t>(order);
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75)
                            / (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double pm1 = 0.0, p = 1.0;
            for (std::size_t k = 1; k <= n; ++k) {
                const double pm2 = pm1;
                pm1 = p;
                p = ((2.0 * k - 1.0) * z * pm1 - (k - 1.0) * pm2) / static_cast<double>(k);
            }
            pp = static_cast<double>(n) * (z * p - pm1) / (z * z - 1.0);
            const double dz = -p / pp;
            z += dz;
            if (std::abs(dz) < 1e-15) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        const double w = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

} // namespace rangekit
