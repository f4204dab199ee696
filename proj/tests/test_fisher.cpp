#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "rangekit/fisher.hpp"
#include "rangekit/pulse_design.hpp"

using namespace rangekit;

namespace {

constexpr double kPi = std::numbers::pi;

SampledWaveform optimal_waveform(int n, std::size_t count = 1u << 16)
{
    const double dt = kPi / 8.0;
    const auto opt = optimize_pulse(n, 2);
    return synthesize_time(opt.pulse, -0.5 * static_cast<double>(count) * dt, dt, count).renormalized();
}

// unit-power sine tone on a periodic grid (integer number of periods)
SampledWaveform sine_tone(std::size_t periods = 512, std::size_t per = 32)
{
    const double dt = 2.0 * kPi / static_cast<double>(per);
    const std::size_t n = per * periods;
    cvector s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = std::sin(static_cast<double>(i) * dt);
    return SampledWaveform(0.0, dt, std::move(s)).renormalized();
}

SampledWaveform comb_wave(std::size_t periods = 512, std::size_t per = 32)
{
    const double dt = 2.0 * kPi / static_cast<double>(per);
    const std::size_t n = per * periods;
    cvector s(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        s[i] = std::cos(t) + 1.0 / std::numbers::sqrt2;
    }
    return SampledWaveform(0.0, dt, std::move(s)).renormalized();
}

} // namespace

TEST_CASE("var_p2 on reference spectra", "[fisher]")
{
    CHECK(var_p2(comb_wave()) == Catch::Approx(0.25).margin(1e-10));
    CHECK(var_p2(sine_tone()) == Catch::Approx(0.0).margin(1e-12));

    // flat spectrum on [-1,1]: <u^4> - <u^2>^2 = 1/5 - 1/9 = 4/45
    LegendrePulse flat{{cdouble(1.0, 0.0)}};
    const double dt = kPi / 8.0;
    const std::size_t count = 1u << 17;
    const auto w = synthesize_time(flat, -0.5 * count * dt, dt, count).renormalized();
    CHECK(var_p2(w) == Catch::Approx(4.0 / 45.0).epsilon(1e-3));

    SampledWaveform unnorm = w;
    for (auto& s : unnorm.samples) s *= 3.0;
    unnorm.normalized = false;
    CHECK_THROWS_AS(var_p2(unnorm), std::invalid_argument);
}

TEST_CASE("momentum-space and position-space Var[p^2] agree", "[fisher]")
{
    for (const auto& w : {optimal_waveform(12), comb_wave()}) {
        const double spec = var_p2(w);
        const double pos = var_p2_position_space(w);
        CHECK(std::abs(spec - pos) <= 0.01 * std::abs(spec) + 1e-12);
    }
}

TEST_CASE("fisher_exact vanishes at zero separation", "[fisher]")
{
    const auto f = optimal_waveform(12);
    const NoiseSpec noise(1.0, f.dt);
    CHECK(fisher_exact(f, 0.0, noise) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("fisher_exact agrees with the small-l expansion", "[fisher]")
{
    const double dt = kPi / 8.0;
    const std::size_t count = 1u << 16;
    const auto sinc_cos = sinc_cosine_pulse(50.0, 1.0, -0.5 * count * dt, dt, count);
    struct Case {
        const char* name;
        SampledWaveform w;
    };
    const Case cases[] = {{"optimal12", optimal_waveform(12)}, {"sinc50", sinc_cos}};
    for (const auto& c : cases) {
        const NoiseSpec noise(2.0, c.w.dt);
        for (double l : {0.01, 0.05}) {
            const double exact = fisher_exact(c.w, l, noise);
            const double small = fisher_small_l(c.w, l, noise);
            INFO(c.name << " l = " << l);
            CHECK(std::abs(exact - small) <= 0.01 * small);
        }
        const double exact3 = fisher_exact(c.w, 0.3, noise);
        const double small3 = fisher_small_l(c.w, 0.3, noise);
        CHECK(std::abs(exact3 - small3) <= 0.10 * small3);
    }
}

TEST_CASE("a pure tone carries no separation information at any l", "[fisher]")
{
    // the log-derivative and gradient terms of the exact expression cancel
    // analytically for f = sin(k0 x); what survives is finite-difference noise,
    // orders of magnitude below what any informative pulse delivers
    const auto tone = sine_tone();
    const NoiseSpec noise(1.0, tone.dt);
    for (double l : {0.05, 0.2, 0.5}) {
        const double best_at_l = l * l / (64.0 * noise.continuum()); // comb information, k0 = 1
        CHECK(std::abs(fisher_exact(tone, l, noise)) < 1e-4 * best_at_l);
    }
}

TEST_CASE("fisher_exact rejects separations that fall off the grid", "[fisher]")
{
    const double dt = kPi / 8.0;
    const std::size_t count = 1u << 10; // deliberately short
    const auto opt = optimize_pulse(12, 2);
    const auto f = synthesize_time(opt.pulse, -0.5 * count * dt, dt, count).renormalized();
    CHECK_THROWS_AS(fisher_exact(f, 150.0, NoiseSpec(1.0, f.dt)), std::invalid_argument);
}

TEST_CASE("fisher_small_l structure", "[fisher]")
{
    const auto f = optimal_waveform(12);
    const NoiseSpec noise(0.5, f.dt);
    const double i1 = fisher_small_l(f, 0.1, noise);
    const double i2 = fisher_small_l(f, 0.2, noise);
    CHECK(i2 == Catch::Approx(4.0 * i1).epsilon(1e-12)); // exact l^2 scaling

    // optimal comb: Var = k0^4/4 so Sigma^2 I = l^2 k0^4 / 64
    const auto comb = comb_wave();
    const NoiseSpec unit(1.0, comb.dt);
    const double sig2 = unit.continuum();
    CHECK(fisher_small_l(comb, 0.1, unit)
          == Catch::Approx(0.01 / (64.0 * sig2)).epsilon(1e-9));

    CHECK(fisher_small_l(sine_tone(), 0.1, unit) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("fisher_multiparam matrix structure and bounds", "[fisher]")
{
    const auto f = optimal_waveform(12);
    const ReflectorScene scene(1.5, 0.0, 0.3);
    const NoiseSpec noise(1e-4, f.dt);
    const auto report = fisher_multiparam(f, scene, noise);

    const double sig2p = noise.continuum();
    CHECK(report.matrix(0, 0) == Catch::Approx(1.0 / sig2p).epsilon(1e-6));
    CHECK(report.matrix(0, 1) == 0.0);
    CHECK(report.matrix(1, 2) == 0.0);
    CHECK(report.matrix(0, 2) == report.matrix(2, 0));
    CHECK(report.matrix(0, 2) != 0.0); // A-l correlation present
    CHECK(report.crb_l > 0.0);

    // positive semidefinite: check through the eigenvalues of the 3x3
    const auto eig = eigh_symmetric(report.matrix);
    for (double ev : eig.eigenvalues) CHECK(ev > -1e-9 * eig.eigenvalues.back());

    // analytic (A,l) inverse against an explicit product with the block
    const double a = report.matrix(0, 0), b = report.matrix(0, 2), c = report.matrix(2, 2);
    const double p00 = a * report.inverse_al[0] + b * report.inverse_al[1];
    const double p01 = a * report.inverse_al[1] + b * report.inverse_al[2];
    const double p11 = b * report.inverse_al[1] + c * report.inverse_al[2];
    CHECK(p00 == Catch::Approx(1.0).epsilon(1e-8));
    CHECK(p01 == Catch::Approx(0.0).margin(1e-8));
    CHECK(p11 == Catch::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("the ll bound reproduces the single-parameter small-l bound", "[fisher]")
{
    const auto f = optimal_waveform(12);
    const double a = 2.5;
    const double l = 0.2;
    const double sigma2 = 1e-3;
    const NoiseSpec noise(sigma2, f.dt);
    const auto report = fisher_multiparam(f, ReflectorScene(a, 0.0, l), noise);

    // Sigma' = A Sigma: the normalized-signal analysis sees sigma2 / A^2
    const NoiseSpec scaled(sigma2 / (a * a), f.dt);
    const double bound_single = 1.0 / fisher_small_l(f, l, scaled);
    CHECK(report.inverse_al[2] == Catch::Approx(bound_single).epsilon(1e-6));
}

TEST_CASE("degenerate pulses are rejected with the named error", "[fisher]")
{
    const auto tone = sine_tone();
    const NoiseSpec noise(1.0, tone.dt);
    CHECK_THROWS_AS(fisher_multiparam(tone, ReflectorScene(1.0, 0.0, 0.1), noise), DegenerateError);
}

TEST_CASE("crb scales as 1/M and rejects singular information", "[fisher]")
{
    const auto f = optimal_waveform(12);
    const NoiseSpec noise(1e-4, f.dt);
    const auto report = fisher_multiparam(f, ReflectorScene(1.0, 0.0, 0.3), noise);

    const auto b1 = crb(report, 1);
    const auto b2 = crb(report, 2);
    for (std::size_t i = 0; i < 3; ++i) CHECK(b2[i] == Catch::Approx(0.5 * b1[i]).epsilon(1e-12));
    CHECK(b1[2] == Catch::Approx(report.inverse_al[2]).epsilon(1e-12));
    CHECK(b1[1] == Catch::Approx(1.0 / report.matrix(1, 1)).epsilon(1e-12));

    const auto singular = fisher_multiparam(f, ReflectorScene(1.0, 0.0, 0.0), noise);
    CHECK_THROWS_AS(crb(singular, 1), std::runtime_error);
}
