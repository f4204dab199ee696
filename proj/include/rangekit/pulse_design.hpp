#pragma once

// Band-limited pulse synthesis and optimization. A pulse is represented by
// complex coefficients over the orthonormal scaled-Legendre basis of the
// unit band [-1, 1]; its time profile is a spherical-Bessel superposition.
// The figure of merit R = 4 Var[p^2] / k0^4 measures how well the pulse
// resolves two close reflectors; R = 1 is the analytic ceiling attained by
// the (non-normalizable) three-tooth comb.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rangekit/linalg.hpp"
#include "rangekit/special_functions.hpp"
#include "rangekit/waveform.hpp"

namespace rangekit {

/// Coefficients c_n over sqrt((2n+1)/2) P_n(u), n = 0 .. N-1. A valid pulse
/// has sum |c_n|^2 = 1 within 1e-10.
struct LegendrePulse {
    cvector coeffs;

    std::size_t truncation() const { return coeffs.size(); }

    double norm_sq() const
    {
        double s = 0.0;
        for (const auto& c : coeffs) s += std::norm(c);
        return s;
    }

    void validate(double tol = 1e-8) const
    {
        if (coeffs.empty()) throw std::invalid_argument("LegendrePulse: empty coefficient vector");
        if (std::abs(norm_sq() - 1.0) > tol)
            throw std::invalid_argument("LegendrePulse: coefficients are not unit-norm");
    }

    /// Spectrum value F(u) = sum c_n sqrt((2n+1)/2) P_n(u), |u| <= 1.
    cdouble spectrum_at(double u) const
    {
        cdouble acc(0.0, 0.0);
        for (std::size_t n = 0; n < coeffs.size(); ++n)
            acc += coeffs[n] * legendre_scale(static_cast<int>(n)) * legendre_eval(static_cast<int>(n), u);
        return acc;
    }
};

/// Matrix of u^power moments over the scaled Legendre basis:
/// entry (n, m) = sqrt((2n+1)/2) sqrt((2m+1)/2) Int P_n P_m u^power du.
/// power 2 is pentadiagonal (|n-m| in {0, 2}); power 1 tridiagonal (|n-m| = 1).
inline Matrix moment_matrix(int truncation, int power)
{
    if (truncation < 1) throw std::invalid_argument("moment_matrix: truncation must be >= 1");
    if (power != 1 && power != 2) throw std::invalid_argument("moment_matrix: power must be 1 or 2");
    const auto n = static_cast<std::size_t>(truncation);
    const QuadratureRule rule = gauss_legendre(2 * truncation + 8);

    Matrix m(n, n);
    for (std::size_t row = 0; row < n; ++row) {
        const std::size_t col = row + static_cast<std::size_t>(power);
        // only the structurally nonzero band is integrated; parity kills the rest
        for (std::size_t c : {row, col}) {
            if (c >= n || (power == 1 && c == row)) continue;
            const double scale = legendre_scale(static_cast<int>(row)) * legendre_scale(static_cast<int>(c));
            const double value = scale * rule.integrate([&](double u) {
                double up = u;
                if (power == 2) up *= u;
                return legendre_eval(static_cast<int>(row), u) * legendre_eval(static_cast<int>(c), u) * up;
            });
            m(row, c) = value;
            m(c, row) = value;
        }
    }
    return m;
}

/// Result of the eigenvector construction. `figure` is R = (l_max - l_min)^2
/// for power 2 and the achieved <u^2> for power 1. `degenerate` flags an
/// extreme eigenvalue with multiplicity > 1 within 1e-9; the returned vector
/// is then the deterministic tie-break choice.
struct OptimizedPulse {
    LegendrePulse pulse;
    double figure = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    bool degenerate = false;
};

namespace detail {

inline bool has_odd_component(const std::vector<double>& v)
{
    for (std::size_t i = 1; i < v.size(); i += 2)
        if (std::abs(v[i]) > 1e-9) return true;
    return false;
}

// Among eigenvectors whose eigenvalue sits within tol of the extreme one,
// pick the vector with the largest |component| on the lowest basis index,
// sign-fixed so that component is positive.
inline std::vector<double> pick_extreme(const SymmetricEigen& eig, bool want_max, bool& degenerate)
{
    const std::size_t n = eig.eigenvalues.size();
    const double extreme = want_max ? eig.eigenvalues[n - 1] : eig.eigenvalues[0];
    std::vector<std::size_t> candidates;
    for (std::size_t j = 0; j < n; ++j)
        if (std::abs(eig.eigenvalues[j] - extreme) <= 1e-9) candidates.push_back(j);
    degenerate = candidates.size() > 1;

    std::size_t best = candidates.front();
    if (degenerate) {
        // lowest index with the largest magnitude across candidates decides
        std::size_t best_row = n;
        double best_mag = -1.0;
        for (std::size_t j : candidates) {
            const auto v = eig.eigenvectors.column(j);
            std::size_t row = 0;
            double mag = std::abs(v[0]);
            for (std::size_t i = 1; i < n; ++i)
                if (std::abs(v[i]) > mag) { mag = std::abs(v[i]); row = i; }
            if (row < best_row || (row == best_row && mag > best_mag)) {
                best_row = row;
                best_mag = mag;
                best = j;
            }
        }
    }
    auto v = eig.eigenvectors.column(best);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0.0)
                for (auto& x : v) x = -x;
            break;
        }
    }
    return v;
}

} // namespace detail

/// Equal superposition of the extreme eigenvectors of the moment matrix,
/// c = (v_max + v_min) / sqrt(2). The relative phase is chosen so the
/// synthesized time-domain pulse is real: +1 when both eigenvectors share
/// parity, i on the odd-parity one when they differ.
inline OptimizedPulse optimize_pulse(int truncation, int power)
{
    if (truncation < 1) throw std::invalid_argument("optimize_pulse: truncation must be >= 1");
    OptimizedPulse out;
    if (truncation == 1) {
        out.pulse.coeffs = {cdouble(1.0, 0.0)};
        const Matrix m = moment_matrix(1, power);
        out.lambda_min = out.lambda_max = m(0, 0);
        out.figure = power == 2 ? 0.0 : 1.0 / 3.0; // <u^2> of the flat spectrum
        return out;
    }

    const Matrix m = moment_matrix(truncation, power);
    const SymmetricEigen eig = eigh_symmetric(m);
    bool degen_max = false, degen_min = false;
    const auto vmax = detail::pick_extreme(eig, true, degen_max);
    const auto vmin = detail::pick_extreme(eig, false, degen_min);
    out.degenerate = degen_max || degen_min;
    out.lambda_min = eig.eigenvalues.front();
    out.lambda_max = eig.eigenvalues.back();

    const bool odd_max = detail::has_odd_component(vmax);
    const bool odd_min = detail::has_odd_component(vmin);
    const cdouble phase_max = (odd_max && !odd_min) ? cdouble(0.0, 1.0) : cdouble(1.0, 0.0);
    const cdouble phase_min = (odd_min && !odd_max) ? cdouble(0.0, 1.0) : cdouble(1.0, 0.0);

    const auto n = static_cast<std::size_t>(truncation);
    out.pulse.coeffs.resize(n);
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    for (std::size_t i = 0; i < n; ++i)
        out.pulse.coeffs[i] = inv_sqrt2 * (phase_max * vmax[i] + phase_min * vmin[i]);

    if (power == 2) {
        out.figure = (out.lambda_max - out.lambda_min) * (out.lambda_max - out.lambda_min);
    } else {
        // achieved second moment of the superposition, integrated exactly
        const QuadratureRule rule = gauss_legendre(2 * truncation + 8);
        out.figure = rule.integrate([&](double u) {
            return u * u * std::norm(out.pulse.spectrum_at(u));
        });
    }
    return out;
}

/// R(N) for N = 2 .. n_max; nondecreasing in N and bounded by 1.
inline std::vector<std::pair<int, double>> r_vs_n_curve(int n_max)
{
    if (n_max < 2) throw std::invalid_argument("r_vs_n_curve: n_max must be >= 2");
    std::vector<std::pair<int, double>> curve;
    curve.reserve(static_cast<std::size_t>(n_max - 1));
    for (int n = 2; n <= n_max; ++n) curve.emplace_back(n, optimize_pulse(n, 2).figure);
    return curve;
}

/// Time-domain synthesis on the unit band [-1, 1]:
/// f(t) = sqrt(2/pi) sum c_n sqrt((2n+1)/2) i^n j_n(t).
inline SampledWaveform synthesize_time(const LegendrePulse& pulse, double t_start, double dt, std::size_t count)
{
    pulse.validate();
    if (count < 2) throw std::invalid_argument("synthesize_time: count must be >= 2");
    if (!(dt > 0.0)) throw std::invalid_argument("synthesize_time: dt must be positive");

    const double front = std::sqrt(2.0 / std::numbers::pi);
    const cdouble iunit(0.0, 1.0);
    cvector samples(count);
    for (std::size_t m = 0; m < count; ++m) {
        const double t = t_start + static_cast<double>(m) * dt;
        cdouble acc(0.0, 0.0);
        cdouble in(1.0, 0.0);
        for (std::size_t n = 0; n < pulse.coeffs.size(); ++n) {
            acc += pulse.coeffs[n] * legendre_scale(static_cast<int>(n)) * in
                   * spherical_bessel_j(static_cast<int>(n), t);
            in *= iunit;
        }
        samples[m] = front * acc;
    }
    SampledWaveform w(t_start, dt, std::move(samples));
    if (std::abs(w.power() - 1.0) <= 1e-6) w.normalized = true;
    return w;
}

/// Sinc-windowed comb pulse
///   S(t) = sqrt(k0/pi) sinc(k0 t / d) (cos(k0 t (1 - 1/d)) + 1/sqrt(2)),
/// band-limited to [-k0, k0] for d > 1, renormalized to unit grid power
/// (the analytic prefactor ignores cross terms between the comb teeth).
inline SampledWaveform sinc_cosine_pulse(double d, double k0, double t_start, double dt, std::size_t count)
{
    if (!(d > 1.0)) throw std::invalid_argument("sinc_cosine_pulse: d must exceed 1");
    if (!(k0 > 0.0)) throw std::invalid_argument("sinc_cosine_pulse: k0 must be positive");
    if (count < 2) throw std::invalid_argument("sinc_cosine_pulse: count must be >= 2");

    auto sinc = [](double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; };
    const double amp = std::sqrt(k0 / std::numbers::pi);
    cvector samples(count);
    for (std::size_t m = 0; m < count; ++m) {
        const double t = t_start + static_cast<double>(m) * dt;
        samples[m] = amp * sinc(k0 * t / d)
                     * (std::cos(k0 * t * (1.0 - 1.0 / d)) + 1.0 / std::numbers::sqrt2);
    }
    return SampledWaveform(t_start, dt, std::move(samples)).renormalized();
}

struct ResolvingPower {
    double value = 0.0;           // R = 4 (<u^4> - <u^2>^2), u = k / k_upper
    double out_of_band = 0.0;     // power fraction above the band edge
    bool leakage_warning = false; // out_of_band > 1%
};

/// Figure of merit from the sampled spectrum. Requires a normalized input
/// and a symmetric band. Zero-pads the DFT by 4x to tame scalloping in the
/// fourth moment.
inline ResolvingPower resolving_power(const SampledWaveform& w, const BandSpec& band, int pad_factor = 4)
{
    if (std::abs(w.power() - 1.0) > 1e-6)
        throw std::invalid_argument("resolving_power: input must be normalized to unit power");
    if (!band.symmetric())
        throw std::invalid_argument("resolving_power: band must be symmetric about zero");

    const auto mom = spectral::moments(w, pad_factor, band.k_upper);
    const double k0_sq = band.k_upper * band.k_upper;
    const double u2 = mom.k2 / k0_sq;
    const double u4 = mom.k4 / (k0_sq * k0_sq);

    ResolvingPower out;
    out.value = 4.0 * (u4 - u2 * u2);
    out.out_of_band = mom.out_of_band;
    out.leakage_warning = mom.out_of_band > 0.01;
    return out;
}

/// One spectral tooth: (angular frequency, amplitude weight).
struct CombTooth {
    double k;
    double amplitude;
};

struct OptimalComb {
    std::vector<CombTooth> teeth;
    double max_variance; // analytic Var[p^2]: k0^4/4 symmetric, (dk kbar)^2 shifted
};

/// The variance-optimal (non-normalizable) wave for a band: the symmetric
/// band gets the three-tooth comb (1/2 at both edges, 1/sqrt(2) at DC), a
/// strictly positive band the equal superposition of its two edges.
inline OptimalComb optimal_wave_comb(const BandSpec& band)
{
    OptimalComb out;
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    if (band.symmetric()) {
        const double k0 = band.k_upper;
        out.teeth = {{-k0, 0.5}, {0.0, inv_sqrt2}, {k0, 0.5}};
        out.max_variance = 0.25 * k0 * k0 * k0 * k0;
    } else if (band.k_lower > 0.0) {
        out.teeth = {{band.k_lower, inv_sqrt2}, {band.k_upper, inv_sqrt2}};
        const double dk = band.bandwidth();
        const double kbar = band.center();
        out.max_variance = dk * dk * kbar * kbar;
    } else {
        // band straddles zero asymmetrically: pair the strongest edge with DC
        const double k_big = std::abs(band.k_lower) > band.k_upper ? band.k_lower : band.k_upper;
        out.teeth = {{0.0, inv_sqrt2}, {k_big, inv_sqrt2}};
        const double k2 = k_big * k_big;
        out.max_variance = 0.25 * k2 * k2;
    }
    return out;
}

/// Maps a waveform on the unit band to [k_lower, k_upper]:
/// g(t) = f(t dk / 2) exp(i kbar t), with the time axis stretched by 2/dk
/// and the amplitude scaled by sqrt(dk/2) so unit power is preserved.
inline SampledWaveform shift_band(const SampledWaveform& w, const BandSpec& band)
{
    const double dk = band.bandwidth();
    const double kbar = band.center();
    const double stretch = 2.0 / dk;

    SampledWaveform out = w;
    out.t_start = w.t_start * stretch;
    out.dt = w.dt * stretch;
    const double amp = std::sqrt(dk / 2.0);
    for (std::size_t m = 0; m < out.samples.size(); ++m) {
        const double t = out.time(m);
        out.samples[m] = amp * w.samples[m] * std::polar(1.0, kbar * t);
    }
    return out;
}

} // namespace rangekit
