#pragma once

// Complex FFT: iterative radix-2 for power-of-two lengths, Bluestein's
// chirp-z algorithm for everything else. Self-contained so the library
// stays header-only with no link dependencies.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace rangekit::fft {

using cdouble = std::complex<double>;
using cvector = std::vector<cdouble>;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

// In-place radix-2 Cooley-Tukey. n must be a power of two.
inline void radix2(cvector& a, bool inverse)
{
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const cdouble wlen(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cdouble u = a[i + j];
                const cdouble v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Bluestein: DFT of arbitrary length via convolution with a chirp,
// carried out with power-of-two FFTs of size >= 2n-1.
inline cvector bluestein(const cvector& x, bool inverse)
{
    const std::size_t n = x.size();
    const double sign = inverse ? 1.0 : -1.0;
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    // chirp[k] = exp(sign * i * pi * k^2 / n); k^2 mod 2n avoids overflow
    cvector chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k2 = (k * k) % (2 * n);
        const double angle = sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = cdouble(std::cos(angle), std::sin(angle));
    }

    cvector a(m, cdouble(0.0, 0.0)), b(m, cdouble(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);

    radix2(a, false);
    radix2(b, false);
    for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
    radix2(a, true);

    cvector out(n);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k] * scale;
    return out;
}

} // namespace detail

/// Forward DFT, X[j] = sum_m x[m] exp(-2*pi*i*j*m/n). No normalization.
inline cvector forward(cvector x)
{
    if (x.empty()) throw std::invalid_argument("fft: empty input");
    if (is_power_of_two(x.size())) {
        detail::radix2(x, false);
        return x;
    }
    return detail::bluestein(x, false);
}

/// Inverse DFT with 1/n normalization.
inline cvector inverse(cvector x)
{
    if (x.empty()) throw std::invalid_argument("fft: empty input");
    const double scale = 1.0 / static_cast<double>(x.size());
    if (is_power_of_two(x.size())) {
        detail::radix2(x, true);
        for (auto& v : x) v *= scale;
        return x;
    }
    cvector out = detail::bluestein(x, true);
    for (auto& v : out) v *= scale;
    return out;
}

/// Angular frequency of DFT bin j for sample spacing dt, in (-pi/dt, pi/dt].
inline double bin_frequency(std::size_t j, std::size_t n, double dt)
{
    const auto jn = static_cast<std::ptrdiff_t>(j);
    const auto half = static_cast<std::ptrdiff_t>(n / 2);
    const std::ptrdiff_t js = (jn > half - 1 + static_cast<std::ptrdiff_t>(n % 2)) ? jn - static_cast<std::ptrdiff_t>(n) : jn;
    return 2.0 * std::numbers::pi * static_cast<double>(js) / (static_cast<double>(n) * dt);
}

/// All bin frequencies in DFT order.
inline std::vector<double> frequencies(std::size_t n, double dt)
{
    std::vector<double> k(n);
    for (std::size_t j = 0; j < n; ++j) k[j] = bin_frequency(j, n, dt);
    return k;
}

} // namespace rangekit::fft
