#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "rangekit/echo.hpp"
#include "rangekit/pulse_design.hpp"

using namespace rangekit;

namespace {

constexpr double kPi = std::numbers::pi;

// long dimensionless grid at 8x Nyquist for the unit band
SampledWaveform synth_default(const LegendrePulse& pulse, std::size_t count = 1u << 16)
{
    const double dt = kPi / 8.0;
    const double t0 = -0.5 * static_cast<double>(count) * dt;
    return synthesize_time(pulse, t0, dt, count);
}

double quadratic_form(const Matrix& m, const std::vector<double>& c)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j) acc += c[i] * m(i, j) * c[j];
    return acc;
}

// fraction of spectral power outside [k_lo, k_hi] (with a one-bin guard band)
double power_outside(const SampledWaveform& w, double k_lo, double k_hi)
{
    const auto spec = spectral::spectrum(w);
    const double bin = 2.0 * kPi / (w.dt * static_cast<double>(w.size()));
    double inside = 0.0, outside = 0.0;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const double k = fft::bin_frequency(j, spec.size(), w.dt);
        const double p = std::norm(spec[j]);
        if (k >= k_lo - 1.5 * bin && k <= k_hi + 1.5 * bin) inside += p;
        else outside += p;
    }
    return outside / (inside + outside);
}

} // namespace

TEST_CASE("moment matrix analytic entries and band structure", "[pulse_design]")
{
    const Matrix m2 = moment_matrix(6, 2);
    CHECK(m2(0, 0) == Catch::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(m2(0, 1) == 0.0);
    CHECK(m2(1, 1) == Catch::Approx(3.0 / 5.0).epsilon(1e-13));
    CHECK(m2(0, 2) == Catch::Approx(2.0 * std::sqrt(5.0) / 15.0).epsilon(1e-13));
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            CHECK(m2(i, j) == m2(j, i));
            const auto gap = i > j ? i - j : j - i;
            if (gap != 0 && gap != 2) CHECK(m2(i, j) == 0.0);
        }

    const Matrix m1 = moment_matrix(6, 1);
    // <n| u |n+1> = (n+1)/sqrt((2n+1)(2n+3))
    for (std::size_t n = 0; n + 1 < 6; ++n) {
        const double expected = (static_cast<double>(n) + 1.0)
                                / std::sqrt((2.0 * n + 1.0) * (2.0 * n + 3.0));
        CHECK(m1(n, n + 1) == Catch::Approx(expected).epsilon(1e-13));
    }
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            const auto gap = i > j ? i - j : j - i;
            if (gap != 1) CHECK(m1(i, j) == 0.0);
        }

    CHECK_THROWS_AS(moment_matrix(0, 2), std::invalid_argument);
    CHECK_THROWS_AS(moment_matrix(4, 3), std::invalid_argument);
}

TEST_CASE("optimize_pulse figures of merit", "[pulse_design]")
{
    const auto p1 = optimize_pulse(1, 2);
    CHECK(p1.figure == 0.0);

    const auto p2 = optimize_pulse(2, 2);
    CHECK(p2.figure == Catch::Approx(16.0 / 225.0).epsilon(1e-12)); // (3/5 - 1/3)^2
    CHECK_FALSE(p2.degenerate);

    const auto p12 = optimize_pulse(12, 2);
    CHECK(p12.figure == Catch::Approx(0.908081071093877).epsilon(1e-9));
    CHECK(std::abs(p12.pulse.norm_sq() - 1.0) < 1e-10);

    // first-moment optimization: achieved <u^2> for N = 12
    const auto q12 = optimize_pulse(12, 1);
    CHECK(q12.figure == Catch::Approx(0.963461278702816).epsilon(1e-9));
    CHECK(std::abs(q12.pulse.norm_sq() - 1.0) < 1e-10);
}

TEST_CASE("R(N) curve is nondecreasing and bounded by one", "[pulse_design]")
{
    const auto curve = r_vs_n_curve(40);
    REQUIRE(curve.size() == 39);
    CHECK(curve.front().first == 2);
    double prev = 0.0;
    for (const auto& [n, r] : curve) {
        CHECK(r >= prev - 1e-10);
        CHECK(r <= 1.0 + 1e-6);
        prev = r;
        if (n == 12) CHECK(std::abs(r - 0.92) <= 0.02);
    }
    CHECK(curve.back().second > 0.98);
}

TEST_CASE("no normalized coefficient vector beats the eigenvector construction", "[pulse_design]")
{
    rng::GaussianStream stream(2024);
    for (int n : {3, 8, 12}) {
        const Matrix m = moment_matrix(n, 2);
        Matrix m_sq(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
            for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j)
                for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k)
                    m_sq(i, j) += m(i, k) * m(k, j);
        const double best = optimize_pulse(n, 2).figure;
        for (int trial = 0; trial < 40; ++trial) {
            std::vector<double> c(static_cast<std::size_t>(n));
            double norm = 0.0;
            for (auto& v : c) {
                v = stream.next();
                norm += v * v;
            }
            for (auto& v : c) v /= std::sqrt(norm);
            const double mean = quadratic_form(m, c);
            const double var = quadratic_form(m_sq, c) - mean * mean;
            CHECK(4.0 * var <= best + 1e-9);
        }
    }
}

TEST_CASE("moment matrix decouples parities; optimal pulses come out real", "[pulse_design]")
{
    // every eigenvector of the u^2 matrix is parity-pure
    for (int n : {7, 12}) {
        const auto eig = eigh_symmetric(moment_matrix(n, 2));
        for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
            const auto v = eig.eigenvectors.column(j);
            double even = 0.0, odd = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i % 2 == 0) even = std::max(even, std::abs(v[i]));
                else odd = std::max(odd, std::abs(v[i]));
            }
            CHECK(std::min(even, odd) < 1e-10);
        }
    }

    // odd truncation: both extreme vectors live in the even sector and the
    // coefficients are real
    const auto p13 = optimize_pulse(13, 2);
    for (std::size_t i = 0; i < p13.pulse.coeffs.size(); ++i) {
        CHECK(std::abs(p13.pulse.coeffs[i].imag()) < 1e-12);
        if (i % 2 == 1) CHECK(std::abs(p13.pulse.coeffs[i]) < 1e-10);
    }

    // even truncation: the extremes have opposite parity; the relative phase
    // puts i on the odd sector so the time-domain pulse is still real
    const auto p12 = optimize_pulse(12, 2);
    for (std::size_t i = 0; i < p12.pulse.coeffs.size(); ++i) {
        if (i % 2 == 0) CHECK(std::abs(p12.pulse.coeffs[i].imag()) < 1e-12);
        else CHECK(std::abs(p12.pulse.coeffs[i].real()) < 1e-12);
    }
    const auto w12 = synth_default(p12.pulse, 1u << 14);
    CHECK(w12.imag_residue() < 1e-12);

    const auto w13 = synth_default(p13.pulse, 1u << 14);
    CHECK(w13.imag_residue() < 1e-12);
}

TEST_CASE("synthesis of the flat spectrum gives sinc(t)/sqrt(pi)", "[pulse_design]")
{
    LegendrePulse flat{{cdouble(1.0, 0.0)}};
    const auto w = synth_default(flat, 1u << 12);
    for (std::size_t i : {100u, 2048u, 3000u}) {
        const double t = w.time(i);
        const double expected = (t == 0.0 ? 1.0 : std::sin(t) / t) / std::sqrt(kPi);
        CHECK(w.samples[i].real() == Catch::Approx(expected).margin(1e-12));
    }

    // oracle: direct quadrature of the constant spectrum 1/sqrt(2) over [-1,1]
    const auto rule = gauss_legendre(64);
    for (double t : {0.0, 0.7, 3.3, 12.0}) {
        const double oracle = rule.integrate([&](double u) {
                                  return std::cos(u * t) / std::sqrt(2.0);
                              }) / std::sqrt(2.0 * kPi);
        CHECK(std::abs(synthesize_time(flat, t, 1.0, 2).samples[0].real() - oracle) < 1e-12);
    }
}

TEST_CASE("synthesized pulses carry unit power on a long grid", "[pulse_design]")
{
    // |f|^2 tails decay like 1/t^2, so the truncated power scales as 1/T
    for (int n : {1, 12}) {
        const auto opt = optimize_pulse(n, 2);
        const auto w = synth_default(opt.pulse, 1u << 19);
        CHECK(std::abs(w.power() - 1.0) < 1e-4);
    }
}

TEST_CASE("sinc-cosine pulse: shape, figure of merit, band confinement", "[pulse_design]")
{
    const double k0 = 1.0;
    const double d = 50.0;
    const std::size_t count = 1u << 16;
    const double dt = kPi / 8.0;
    const auto w = sinc_cosine_pulse(d, k0, -0.5 * count * dt, dt, count);
    CHECK(w.normalized);

    // renormalization preserves the analytic shape up to one common factor
    auto raw = [&](double t) {
        const double x = k0 * t / d;
        const double sinc = x == 0.0 ? 1.0 : std::sin(x) / x;
        return std::sqrt(k0 / kPi) * sinc * (std::cos(k0 * t * (1.0 - 1.0 / d)) + 1.0 / std::numbers::sqrt2);
    };
    const double scale = w.samples[count / 2].real() / raw(w.time(count / 2));
    for (std::size_t i : {count / 2 + 77u, count / 2 + 1234u, count / 4}) {
        CHECK(w.samples[i].real() == Catch::Approx(scale * raw(w.time(i))).margin(1e-10));
    }
    // the t = 0 sample sits at the analytic peak value scaled by the same factor
    CHECK(w.samples[count / 2].real()
          == Catch::Approx(scale * std::sqrt(k0 / kPi) * (1.0 + 1.0 / std::numbers::sqrt2)).margin(1e-12));

    const auto r = resolving_power(w, BandSpec(-k0, k0));
    CHECK(std::abs(r.value - 0.92) <= 0.02);
    CHECK_FALSE(r.leakage_warning);
    CHECK(power_outside(w, -k0, k0) < 1e-2);

    CHECK_THROWS_AS(sinc_cosine_pulse(1.0, k0, -1.0, 0.1, 64), std::invalid_argument);
    CHECK_THROWS_AS(sinc_cosine_pulse(50.0, -1.0, -1.0, 0.1, 64), std::invalid_argument);
}

TEST_CASE("resolving power of exact spectra", "[pulse_design]")
{
    // periodic grid, integer number of periods: the comb teeth sit exactly on bins
    const std::size_t per = 32, nper = 512;
    const double dt = 2.0 * kPi / static_cast<double>(per);
    const std::size_t n = per * nper;
    cvector comb(n), tone(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        comb[i] = std::cos(t) + 1.0 / std::numbers::sqrt2;
        tone[i] = std::polar(1.0, t); // single tooth at k = +1
    }
    const auto wc = SampledWaveform(0.0, dt, std::move(comb)).renormalized();
    const auto rc = resolving_power(wc, BandSpec(-1.0, 1.0), 1);
    CHECK(rc.value == Catch::Approx(1.0).margin(1e-9));

    const auto wt = SampledWaveform(0.0, dt, std::move(tone)).renormalized();
    const auto rt = resolving_power(wt, BandSpec(-1.0, 1.0), 1);
    CHECK(rt.value == Catch::Approx(0.0).margin(1e-12));

    SampledWaveform unnorm = wt;
    for (auto& s : unnorm.samples) s *= 2.0;
    unnorm.normalized = false;
    CHECK_THROWS_AS(resolving_power(unnorm, BandSpec(-1.0, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(resolving_power(wt, BandSpec(0.5, 1.0)), std::invalid_argument);
}

TEST_CASE("spectrum figure matches the eigenvalue figure within 2%", "[pulse_design]")
{
    // (l_max - l_min)^2 is the variance of the truncated matrix; the exact
    // integral of the synthesized spectrum converges to it from above as the
    // truncation grows (5.7% apart at N = 6, 0.8% at N = 12)
    for (int n : {12, 20}) {
        const auto opt = optimize_pulse(n, 2);
        const auto w = synth_default(opt.pulse).renormalized();
        const auto r = resolving_power(w, BandSpec(-1.0, 1.0));
        CHECK(std::abs(r.value - opt.figure) <= 0.02 * opt.figure);
        CHECK(power_outside(w, -1.0, 1.0) < 1e-2);
    }
}

TEST_CASE("resolving power warns about out-of-band leakage", "[pulse_design]")
{
    // tone at k = 2 declared against the unit band: all power out of band
    const std::size_t per = 16, nper = 64;
    const double dt = 2.0 * kPi / (static_cast<double>(per) * 2.0);
    cvector s(per * nper);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::polar(1.0, 2.0 * static_cast<double>(i) * dt);
    const auto w = SampledWaveform(0.0, dt, std::move(s)).renormalized();
    const auto r = resolving_power(w, BandSpec(-1.0, 1.0), 1);
    CHECK(r.leakage_warning);
    CHECK(r.out_of_band > 0.99);
}

TEST_CASE("degenerate extreme eigenvalues use the deterministic tie-break", "[pulse_design]")
{
    // two-fold degenerate top eigenvalue; the rule picks the eigenvector with
    // the largest magnitude on the lowest index, sign-fixed positive
    Matrix m(3, 3);
    m(0, 0) = 2.0;
    m(1, 1) = 2.0;
    m(2, 2) = 1.0;
    const auto eig = eigh_symmetric(m);
    bool degenerate = false;
    const auto v = rangekit::detail::pick_extreme(eig, true, degenerate);
    CHECK(degenerate);
    CHECK(v[0] == Catch::Approx(1.0));
    CHECK(std::abs(v[1]) < 1e-12);
    CHECK(std::abs(v[2]) < 1e-12);
}

TEST_CASE("optimal wave comb teeth and analytic variances", "[pulse_design]")
{
    const auto sym = optimal_wave_comb(BandSpec(-1.0, 1.0));
    REQUIRE(sym.teeth.size() == 3);
    CHECK(sym.teeth[0].k == -1.0);
    CHECK(sym.teeth[0].amplitude == 0.5);
    CHECK(sym.teeth[1].k == 0.0);
    CHECK(sym.teeth[1].amplitude == Catch::Approx(1.0 / std::numbers::sqrt2));
    CHECK(sym.teeth[2].k == 1.0);
    CHECK(sym.max_variance == Catch::Approx(0.25).epsilon(1e-15));

    // variance collapses with the bandwidth
    double prev = 1.0;
    for (double eps : {1e-2, 1e-4, 1e-6}) {
        const auto narrow = optimal_wave_comb(BandSpec(1.0, 1.0 + eps));
        CHECK(narrow.max_variance < prev);
        prev = narrow.max_variance;
    }
    CHECK(prev < 1e-11);

    // the paper's shifted band, in angular units
    const auto shifted = optimal_wave_comb(BandSpec(10.0 / (2.0 * kPi), 50.0 / (2.0 * kPi)));
    REQUIRE(shifted.teeth.size() == 2);
    const double dk = 40.0 / (2.0 * kPi), kbar = 30.0 / (2.0 * kPi);
    CHECK(shifted.max_variance == Catch::Approx(dk * dk * kbar * kbar).epsilon(1e-15));
    CHECK(shifted.teeth[0].amplitude == Catch::Approx(1.0 / std::numbers::sqrt2));
}

TEST_CASE("shift_band: identity, power preservation, spectral support", "[pulse_design]")
{
    const auto opt = optimize_pulse(12, 1);
    const auto w = synth_default(opt.pulse, 1u << 15).renormalized();

    const auto same = shift_band(w, BandSpec(-1.0, 1.0));
    double diff = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) diff = std::max(diff, std::abs(same.samples[i] - w.samples[i]));
    CHECK(diff < 1e-14);
    CHECK(same.dt == w.dt);

    const BandSpec target(10.0, 50.0);
    const auto g = shift_band(w, target);
    CHECK(std::abs(g.power() - 1.0) < 1e-9);
    CHECK(power_outside(g, target.k_lower, target.k_upper) < 1e-2);
}
