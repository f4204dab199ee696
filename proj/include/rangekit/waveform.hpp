#pragma once

// Sampled complex waveforms on uniform time grids, frequency bands, and the
// spectral operations (fractional shift, derivative, moments) shared by the
// pulse-design, metrology, and simulation layers.
//
// Spectral convention: the continuum pair is
//   f(t) = (1/sqrt(2*pi)) Int F(k) exp(+i k t) dk
//   F(k) = (1/sqrt(2*pi)) Int f(t) exp(-i k t) dt
// so a unit-power waveform has a unit-power spectrum.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "rangekit/fft.hpp"

namespace rangekit {

using cdouble = std::complex<double>;
using cvector = std::vector<cdouble>;

/// Frequency band [k_lower, k_upper] in angular units (rad per unit length/time).
struct BandSpec {
    double k_lower;
    double k_upper;

    BandSpec(double lower, double upper) : k_lower(lower), k_upper(upper)
    {
        if (!(k_upper > k_lower)) throw std::invalid_argument("BandSpec: k_upper must exceed k_lower");
    }

    double bandwidth() const { return k_upper - k_lower; }
    double center() const { return 0.5 * (k_upper + k_lower); }
    bool symmetric(double tol = 1e-12) const { return std::abs(k_upper + k_lower) <= tol * bandwidth(); }
};

/// Uniformly sampled complex signal. `normalized` tags unit grid power,
/// i.e. sum |s_m|^2 dt = 1 within 1e-6.
struct SampledWaveform {
    double t_start = 0.0;
    double dt = 0.0;
    cvector samples;
    bool normalized = false;

    SampledWaveform() = default;
    SampledWaveform(double start, double step, cvector s, bool unit_power = false)
        : t_start(start), dt(step), samples(std::move(s)), normalized(unit_power)
    {
        validate();
    }

    void validate() const
    {
        if (!(dt > 0.0)) throw std::invalid_argument("SampledWaveform: dt must be positive");
        if (samples.size() < 2) throw std::invalid_argument("SampledWaveform: at least 2 samples required");
        if (normalized && std::abs(power() - 1.0) > 1e-6)
            throw std::invalid_argument("SampledWaveform: normalized tag but grid power is not 1");
    }

    std::size_t size() const { return samples.size(); }
    double time(std::size_t i) const { return t_start + static_cast<double>(i) * dt; }
    double duration() const { return static_cast<double>(samples.size()) * dt; }

    /// Grid power, sum |s_m|^2 dt.
    double power() const
    {
        double p = 0.0;
        for (const auto& s : samples) p += std::norm(s);
        return p * dt;
    }

    double max_abs() const
    {
        double m = 0.0;
        for (const auto& s : samples) m = std::max(m, std::abs(s));
        return m;
    }

    /// Largest |imaginary part| relative to the peak magnitude.
    double imag_residue() const
    {
        double m = 0.0;
        for (const auto& s : samples) m = std::max(m, std::abs(s.imag()));
        const double peak = max_abs();
        return peak > 0.0 ? m / peak : 0.0;
    }

    SampledWaveform renormalized() const
    {
        const double p = power();
        if (p <= 0.0) throw std::invalid_argument("renormalized: zero-power waveform");
        SampledWaveform out = *this;
        const double scale = 1.0 / std::sqrt(p);
        for (auto& s : out.samples) s *= scale;
        out.normalized = true;
        return out;
    }

    /// Fraction of grid power within `margin` of either end of the grid.
    /// Used to guard spectral (circular) shifts against wrap-around.
    double edge_power_fraction(double margin) const
    {
        const double total = power();
        if (total <= 0.0) return 0.0;
        double edge = 0.0;
        const double t_end = time(samples.size() - 1);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double t = time(i);
            if (t - t_start < margin || t_end - t < margin) edge += std::norm(samples[i]);
        }
        return edge * dt / total;
    }
};

namespace spectral {

/// DFT of the samples; bin j holds the angular frequency fft::bin_frequency(j, n, dt).
inline cvector spectrum(const SampledWaveform& w) { return fft::forward(w.samples); }

/// Samples of w(t + delta) via a spectral phase ramp. Exact for band-limited
/// content; circular at the grid ends, so keep tail power away from them.
inline SampledWaveform shift(const SampledWaveform& w, double delta)
{
    if (delta == 0.0) return w;
    cvector spec = fft::forward(w.samples);
    const std::size_t n = spec.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double k = fft::bin_frequency(j, n, w.dt);
        spec[j] *= std::polar(1.0, k * delta);
    }
    SampledWaveform out = w;
    out.samples = fft::inverse(std::move(spec));
    return out;
}

/// d^order/dt^order via multiplication by (ik)^order in the spectrum.
inline SampledWaveform derivative(const SampledWaveform& w, int order)
{
    cvector spec = fft::forward(w.samples);
    const std::size_t n = spec.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double k = fft::bin_frequency(j, n, w.dt);
        cdouble factor(1.0, 0.0);
        for (int p = 0; p < order; ++p) factor *= cdouble(0.0, k);
        spec[j] *= factor;
    }
    SampledWaveform out = w;
    out.samples = fft::inverse(std::move(spec));
    out.normalized = false;
    return out;
}

/// Real inner product Int a(t) b(t) dt on a common grid (real parts).
inline double inner_product(const SampledWaveform& a, const SampledWaveform& b)
{
    if (a.size() != b.size()) throw std::invalid_argument("inner_product: grid mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a.samples[i].real() * b.samples[i].real();
    return acc * a.dt;
}

struct SpectrumMoments {
    double total_power = 0.0;  // spectral power, equals grid power by Parseval
    double k2 = 0.0;           // <k^2> over the normalized power spectrum
    double k4 = 0.0;           // <k^4>
    double out_of_band = 0.0;  // power fraction beyond the reference |k| (0 if none given)
};

/// Power-spectrum moments. pad_factor >= 1 zero-pads the DFT to refine the
/// frequency grid. If band_edge > 0, also reports the power fraction at
/// |k| > band_edge * (1 + 1e-9).
inline SpectrumMoments moments(const SampledWaveform& w, int pad_factor = 1, double band_edge = 0.0)
{
    if (pad_factor < 1) throw std::invalid_argument("moments: pad_factor must be >= 1");
    cvector padded = w.samples;
    padded.resize(w.size() * static_cast<std::size_t>(pad_factor), cdouble(0.0, 0.0));
    const cvector spec = fft::forward(std::move(padded));
    const std::size_t n = spec.size();

    double total = 0.0, m2 = 0.0, m4 = 0.0, outside = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double p = std::norm(spec[j]);
        const double k = fft::bin_frequency(j, n, w.dt);
        const double k2 = k * k;
        total += p;
        m2 += p * k2;
        m4 += p * k2 * k2;
        if (band_edge > 0.0 && std::abs(k) > band_edge * (1.0 + 1e-9)) outside += p;
    }
    if (total <= 0.0) throw std::invalid_argument("moments: zero-power waveform");

    SpectrumMoments out;
    out.k2 = m2 / total;
    out.k4 = m4 / total;
    out.out_of_band = outside / total;
    // convert raw DFT power to grid power: dt * (1/n) * sum |spec|^2
    out.total_power = total * w.dt / static_cast<double>(n);
    return out;
}

} // namespace spectral

/// Waveform CSV format shared by every tool: header `t,re,im`.
inline std::string waveform_csv_header() { return "t,re,im"; }

} // namespace rangekit
