#pragma once

// Forward models for return signals: the ideal two-reflector echo, additive
// Gaussian detector noise, and the coax-network multipath ladder that
// explains the systematic bias seen with real T-junction cabling.
//
// All sub-sample shifts go through spectral phase ramps, which are exact for
// band-limited signals; interpolation would corrupt separations far below
// the sample spacing.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

#include "rangekit/fisher.hpp"
#include "rangekit/waveform.hpp"

namespace rangekit {

namespace rng {

// splitmix64: tiny, seedable, and bit-stable across platforms.
inline std::uint64_t splitmix64(std::uint64_t& state)
{
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Independent substream seed for a (master seed, index) pair.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    splitmix64(s);
    return splitmix64(s);
}

/// Standard normal deviates by Box-Muller over splitmix64 uniforms.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : state_(seed) {}

    double next()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    double uniform()
    {
        return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace rng

/// Coax stub network behind a T-junction: the sent pulse plus an infinite
/// ladder of re-reflections spaced by the stub round trip.
struct CableNetwork {
    double stub_roundtrip;      // delay between successive echoes (the experiment's l)
    double junction_reflectance; // r, |r| < 1
    double attenuation;          // per-bounce amplitude factor a, 0 < a <= 1
    int truncation;              // number of echo terms kept, K >= 1

    CableNetwork(double roundtrip, double r, double a, int k)
        : stub_roundtrip(roundtrip), junction_reflectance(r), attenuation(a), truncation(k)
    {
        if (!(roundtrip > 0.0)) throw std::invalid_argument("CableNetwork: stub_roundtrip must be positive");
        if (!(std::abs(r) < 1.0)) throw std::invalid_argument("CableNetwork: |junction_reflectance| must be < 1");
        if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("CableNetwork: attenuation must be in (0, 1]");
        if (k < 1) throw std::invalid_argument("CableNetwork: truncation must be >= 1");
    }

    /// Amplitude of echo k: b_0 = 1 (direct), b_k = a^k r^(k-1) for k >= 1,
    /// so b_{k+1}/b_k = r a is constant and r -> 0 leaves exactly two terms
    /// with equal weights at a = 1 (the ideal two-reflector composite).
    double echo_amplitude(int k) const
    {
        if (k == 0) return 1.0;
        return std::pow(attenuation, k) * std::pow(junction_reflectance, k - 1);
    }
};

/// Mean return A [f(x - x0 + l/2) + f(x - x0 - l/2)] / 2. With `normalized`
/// set the result is rescaled to unit power (the N_l convention), which
/// absorbs A.
inline SampledWaveform two_reflector_echo(const SampledWaveform& f, const ReflectorScene& scene,
                                          bool normalized = false)
{
    const double reach = std::abs(scene.offset) + 0.5 * scene.separation + f.dt;
    if (f.edge_power_fraction(reach) > 1e-3)
        throw std::invalid_argument("two_reflector_echo: shifts would push > 0.1% of pulse power off the grid");

    const auto plus = spectral::shift(f, -scene.offset + 0.5 * scene.separation);
    const auto minus = spectral::shift(f, -scene.offset - 0.5 * scene.separation);
    SampledWaveform out = f;
    out.normalized = false;
    for (std::size_t i = 0; i < f.size(); ++i)
        out.samples[i] = 0.5 * scene.amplitude * (plus.samples[i] + minus.samples[i]);
    if (normalized) out = out.renormalized();
    return out;
}

/// Adds zero-mean Gaussian noise of per-sample variance sigma2 to the real
/// part of every sample. Identical seeds give identical output.
inline SampledWaveform add_noise(const SampledWaveform& w, const NoiseSpec& noise, std::uint64_t seed)
{
    rng::GaussianStream stream(seed);
    const double sd = std::sqrt(noise.sigma2);
    SampledWaveform out = w;
    out.normalized = false;
    for (auto& s : out.samples) s += sd * stream.next();
    return out;
}

/// c0 S(t) + c1 S(t + delay), fractional delays included.
inline SampledWaveform composite_echo(const SampledWaveform& s, double c0, double c1, double delay)
{
    const auto delayed = spectral::shift(s, delay);
    SampledWaveform out = s;
    out.normalized = false;
    for (std::size_t i = 0; i < s.size(); ++i)
        out.samples[i] = c0 * s.samples[i] + c1 * delayed.samples[i];
    return out;
}

struct MultipathEcho {
    SampledWaveform signal;
    double truncated_tail_fraction = 0.0; // power of dropped terms over total ladder power
    bool truncation_warning = false;      // tail fraction > 1e-6
};

/// Geometric echo ladder sum_{k=0..K} b_k S(t + k * stub_roundtrip).
inline MultipathEcho multipath_echo(const SampledWaveform& s, const CableNetwork& net)
{
    const double reach = net.truncation * net.stub_roundtrip + s.dt;
    if (s.edge_power_fraction(reach) > 1e-3)
        throw std::invalid_argument("multipath_echo: echo ladder does not fit on the grid");

    MultipathEcho out;
    out.signal = s;
    out.signal.normalized = false;
    for (int k = 1; k <= net.truncation; ++k) {
        const auto shifted = spectral::shift(s, k * net.stub_roundtrip);
        const double b = net.echo_amplitude(k);
        for (std::size_t i = 0; i < s.size(); ++i) out.signal.samples[i] += b * shifted.samples[i];
    }

    double kept = 0.0;
    for (int k = 0; k <= net.truncation; ++k) {
        const double b = net.echo_amplitude(k);
        kept += b * b;
    }
    const double ratio = net.junction_reflectance * net.attenuation;
    const double b_next = net.echo_amplitude(net.truncation + 1);
    const double dropped = b_next * b_next / std::max(1.0 - ratio * ratio, 1e-300);
    out.truncated_tail_fraction = dropped / (kept + dropped);
    out.truncation_warning = out.truncated_tail_fraction > 1e-6;
    return out;
}

} // namespace rangekit
