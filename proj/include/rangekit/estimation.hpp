#pragma once

// Estimators for the reflector separation: the closed-form maximum
// likelihood solution of the moment equations, and the RMSE grid search
// used experimentally, plus Monte Carlo evaluation against the
// Cramer-Rao bound.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rangekit/echo.hpp"
#include "rangekit/fisher.hpp"
#include "rangekit/waveform.hpp"

namespace rangekit {

struct NoSignalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EstimateResult {
    double l_hat = 0.0;
    double l_hat_squared = 0.0; // signed, pre-clamp
    double a_hat = std::numeric_limits<double>::quiet_NaN();
    double x0_hat = std::numeric_limits<double>::quiet_NaN();
    double c0_hat = std::numeric_limits<double>::quiet_NaN(); // grid search only
    double c1_hat = std::numeric_limits<double>::quiet_NaN(); // grid search only
    bool clamped = false;       // l_hat_squared < 0, l_hat clamped to 0
    double objective = 0.0;     // residual RMSE of the fitted model
    bool boundary_warning = false;
    bool conditioning_warning = false;
};

namespace detail {

// Template spectra reused across Monte Carlo trials.
struct MleTemplate {
    double dt = 0.0;
    double t_start = 0.0;
    std::size_t n = 0;
    cvector f_hat;
    cvector fp_hat;
    cvector fpp_hat;
    std::vector<double> k;
    double grad_energy = 0.0;  // Int f'^2
    double curv_energy = 0.0;  // Int f''^2
    double variance_p2 = 0.0;  // Var[p^2]_f
    double f_norm_sq = 0.0;    // Int f^2 (= 1 for a valid template)

    explicit MleTemplate(const SampledWaveform& f)
    {
        if (std::abs(f.power() - 1.0) > 1e-6)
            throw std::invalid_argument("mle_estimate: template must be normalized to unit power");
        if (f.imag_residue() > 1e-8)
            throw std::invalid_argument("mle_estimate: real-valued template required");
        dt = f.dt;
        t_start = f.t_start;
        n = f.size();
        f_hat = fft::forward(f.samples);
        k = fft::frequencies(n, dt);
        fp_hat.resize(n);
        fpp_hat.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            fp_hat[j] = f_hat[j] * cdouble(0.0, k[j]);
            fpp_hat[j] = f_hat[j] * (-k[j] * k[j]);
        }
        const double scale = dt / static_cast<double>(n);
        double d = 0.0, e = 0.0, p = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            d += std::norm(fp_hat[j]);
            e += std::norm(fpp_hat[j]);
            p += std::norm(f_hat[j]);
        }
        grad_energy = d * scale;
        curv_energy = e * scale;
        f_norm_sq = p * scale;
        variance_p2 = curv_energy - grad_energy * grad_energy;
    }

    // Int s(x) g(x - x0) dx for a template spectrum g_hat, via Parseval.
    double correlate(const cvector& s_hat, const cvector& g_hat, double x0) const
    {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const cdouble term = s_hat[j] * std::conj(g_hat[j]) * std::polar(1.0, k[j] * x0);
            acc += term.real();
        }
        return acc * dt / static_cast<double>(n);
    }
};

// Coarse alignment: lag maximizing the circular cross-correlation with f.
inline double coarse_offset(const MleTemplate& tmpl, const cvector& s_hat)
{
    cvector prod(tmpl.n);
    for (std::size_t j = 0; j < tmpl.n; ++j) prod[j] = s_hat[j] * std::conj(tmpl.f_hat[j]);
    const cvector corr = fft::inverse(std::move(prod));
    std::size_t best = 0;
    double best_val = corr[0].real();
    for (std::size_t m = 1; m < tmpl.n; ++m) {
        if (corr[m].real() > best_val) {
            best_val = corr[m].real();
            best = m;
        }
    }
    auto lag = static_cast<std::ptrdiff_t>(best);
    if (lag > static_cast<std::ptrdiff_t>(tmpl.n / 2)) lag -= static_cast<std::ptrdiff_t>(tmpl.n);
    return static_cast<double>(lag) * tmpl.dt;
}

// Root of g(x0) = Int s f'(x - x0) dx near the correlation peak: Newton with
// analytic derivative, falling back to bisection if a step leaves the
// bracket [coarse - dt, coarse + dt].
inline double refine_offset(const MleTemplate& tmpl, const cvector& s_hat, double coarse)
{
    auto g = [&](double x0) { return tmpl.correlate(s_hat, tmpl.fp_hat, x0); };
    auto gp = [&](double x0) { return -tmpl.correlate(s_hat, tmpl.fpp_hat, x0); };

    double lo = coarse - tmpl.dt, hi = coarse + tmpl.dt;
    double x = coarse;
    for (int iter = 0; iter < 60; ++iter) {
        const double gx = g(x);
        const double gpx = gp(x);
        double next = (gpx != 0.0) ? x - gx / gpx : x;
        if (!(next > lo && next < hi)) { // bisection fallback
            const double glo = g(lo), ghi = g(hi);
            if (glo == 0.0) return lo;
            if (ghi == 0.0) return hi;
            if (glo * ghi > 0.0) return x; // no bracket; keep the Newton iterate
            next = 0.5 * (lo + hi);
            for (int b = 0; b < 60; ++b) {
                const double gm = g(next);
                if (gm == 0.0) break;
                if (gm * glo < 0.0) hi = next; else lo = next;
                next = 0.5 * (lo + hi);
            }
            return next;
        }
        if (std::abs(next - x) < 1e-12 * std::max(1.0, std::abs(x))) return next;
        x = next;
    }
    return x;
}

inline EstimateResult mle_estimate_impl(const SampledWaveform& s, const MleTemplate& tmpl)
{
    if (s.size() != tmpl.n || std::abs(s.dt - tmpl.dt) > 1e-12 * tmpl.dt)
        throw std::invalid_argument("mle_estimate: signal and template grids differ");

    if (tmpl.variance_p2 <= 1e-12 * std::max(tmpl.curv_energy, 1.0))
        throw DegenerateError("mle_estimate: Var[p^2] of the template vanishes; "
                              "the separation estimator does not exist for this pulse");

    const cvector s_hat = fft::forward(s.samples);
    const double x0 = refine_offset(tmpl, s_hat, coarse_offset(tmpl, s_hat));

    const double sf = tmpl.correlate(s_hat, tmpl.f_hat, x0);
    const double sfpp = tmpl.correlate(s_hat, tmpl.fpp_hat, x0);

    double s_norm_sq = 0.0;
    for (const auto& v : s.samples) s_norm_sq += std::norm(v);
    s_norm_sq *= s.dt;
    if (std::abs(sf) <= 1e-9 * std::sqrt(s_norm_sq * tmpl.f_norm_sq))
        throw NoSignalError("mle_estimate: signal-template overlap is below the noise floor");

    EstimateResult result;
    result.x0_hat = x0;
    const double l2_over_8 = (sfpp / sf + tmpl.grad_energy) / tmpl.variance_p2;
    result.l_hat_squared = 8.0 * l2_over_8;
    result.clamped = result.l_hat_squared < 0.0;
    result.l_hat = std::sqrt(std::max(0.0, result.l_hat_squared));

    const double denom = 1.0 - l2_over_8 * tmpl.grad_energy;
    result.a_hat = std::abs(denom) > 1e-6 ? sf / denom : sf;

    // residual RMSE of s - A [f + (l^2/8) f''] assembled from the scalars
    const double q = result.clamped ? 0.0 : l2_over_8;
    const double model_norm_sq = tmpl.f_norm_sq - 2.0 * q * tmpl.grad_energy + q * q * tmpl.curv_energy;
    const double res_sq = s_norm_sq - 2.0 * result.a_hat * (sf + q * sfpp)
                          + result.a_hat * result.a_hat * model_norm_sq;
    result.objective = std::sqrt(std::max(0.0, res_sq) / (static_cast<double>(tmpl.n) * tmpl.dt));
    return result;
}

} // namespace detail

/// Closed-form maximum-likelihood estimate from the moment equations
/// Int (s - mu) f^(n) dx = 0, n = 0, 1, 2:
///   l^2/8 = (Int s f'' / Int s f + Int f'^2) / Var[p^2]_f
/// with x0 fit first from the n = 1 equation (cross-correlation peak plus
/// root refinement) and A from the n = 0 equation. A negative l^2 solution
/// is reported signed and clamped only in l_hat.
inline EstimateResult mle_estimate(const SampledWaveform& s, const SampledWaveform& f)
{
    return detail::mle_estimate_impl(s, detail::MleTemplate(f));
}

/// RMSE grid search for the composite model c0 S(t) + c1 S(t + delay):
/// linear least squares for (c0, c1) at each candidate delay, three-point
/// quadratic refinement around the discrete minimum.
inline EstimateResult grid_search_rmse(const SampledWaveform& s, const SampledWaveform& S,
                                       double l_min, double l_max, int steps)
{
    if (steps < 2) throw std::invalid_argument("grid_search_rmse: steps must be >= 2");
    if (!(l_max > l_min)) throw std::invalid_argument("grid_search_rmse: l_max must exceed l_min");
    if (s.size() != S.size() || std::abs(s.dt - S.dt) > 1e-12 * S.dt)
        throw std::invalid_argument("grid_search_rmse: signal and template grids differ");

    const std::size_t n = s.size();
    const double dt = s.dt;
    const cvector s_hat = fft::forward(s.samples);
    const cvector S_hat = fft::forward(S.samples);
    const std::vector<double> k = fft::frequencies(n, dt);
    const double scale = dt / static_cast<double>(n);

    double ss = 0.0, SS = 0.0, sS0 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        ss += std::norm(s_hat[j]);
        SS += std::norm(S_hat[j]);
        sS0 += (s_hat[j] * std::conj(S_hat[j])).real();
    }
    ss *= scale;
    SS *= scale;
    sS0 *= scale;

    struct Fit {
        double c0, c1, rmse_sq;
        bool conditioning;
    };
    // S(t + delay) has spectrum S_hat * exp(i k delay); <S, Sd> and <s, Sd>
    // follow from Parseval without leaving the frequency domain.
    auto fit_at = [&](double delay) {
        double SSd = 0.0, sSd = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const cdouble ph = std::polar(1.0, -k[j] * delay);
            SSd += (S_hat[j] * std::conj(S_hat[j]) * ph).real();
            sSd += (s_hat[j] * std::conj(S_hat[j]) * ph).real();
        }
        SSd *= scale;
        sSd *= scale;
        Fit fit{0.0, 0.0, 0.0, false};
        const double det = SS * SS - SSd * SSd;
        if (det <= 1e-12 * SS * SS) {
            fit.conditioning = true; // templates collinear: fold into one amplitude
            fit.c0 = sS0 / SS;
            fit.c1 = 0.0;
        } else {
            fit.c0 = (SS * sS0 - SSd * sSd) / det;
            fit.c1 = (SS * sSd - SSd * sS0) / det;
        }
        const double res = ss - 2.0 * (fit.c0 * sS0 + fit.c1 * sSd) + fit.c0 * fit.c0 * SS
                           + fit.c1 * fit.c1 * SS + 2.0 * fit.c0 * fit.c1 * SSd;
        fit.rmse_sq = std::max(0.0, res) / (static_cast<double>(n) * dt);
        return fit;
    };

    std::vector<double> rmse_sq(static_cast<std::size_t>(steps));
    bool any_conditioning = false;
    const double step = (l_max - l_min) / static_cast<double>(steps - 1);
    std::size_t best = 0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(steps); ++i) {
        const Fit fit = fit_at(l_min + static_cast<double>(i) * step);
        rmse_sq[i] = fit.rmse_sq;
        any_conditioning = any_conditioning || fit.conditioning;
        if (rmse_sq[i] < rmse_sq[best]) best = i;
    }

    EstimateResult result;
    double delay = l_min + static_cast<double>(best) * step;
    if (best == 0 || best + 1 == static_cast<std::size_t>(steps)) {
        result.boundary_warning = true;
    } else {
        // vertex of the parabola through the three squared-RMSE points around
        // the minimum (the squared objective is locally quadratic in delay)
        const double y0 = rmse_sq[best - 1], y1 = rmse_sq[best], y2 = rmse_sq[best + 1];
        const double denom = y0 - 2.0 * y1 + y2;
        if (denom > 0.0) delay += 0.5 * (y0 - y2) / denom * step;
    }

    const Fit fit = fit_at(delay);
    result.l_hat = delay;
    result.l_hat_squared = delay * delay;
    result.c0_hat = fit.c0;
    result.c1_hat = fit.c1;
    result.objective = std::sqrt(fit.rmse_sq);
    result.conditioning_warning = any_conditioning || fit.conditioning;
    return result;
}

enum class EstimatorKind { mle, grid };

struct MonteCarloOptions {
    // grid-search bounds; when l_max <= l_min they default to
    // [0.25 l, 1.75 l] around the true separation
    double grid_l_min = 0.0;
    double grid_l_max = 0.0;
    int grid_steps = 41;
    // when set, the clean signal is the multipath ladder (A/2-scaled) instead
    // of the ideal two-reflector echo
    std::optional<CableNetwork> multipath;
};

struct MonteCarloSummary {
    int trials = 0;
    int failures = 0;
    double mean_l_hat = 0.0;
    double var_l_hat = 0.0;
    double bias = 0.0;
    double crb_l = 0.0;      // single-shot Cramer-Rao bound for the scenario
    double clamp_rate = 0.0;
    double true_separation = 0.0;
    std::uint64_t master_seed = 0;
};

/// M independent noisy-echo trials with per-trial seed substreams.
/// A trial whose estimator throws is dropped and counted in `failures`.
/// Identical master seeds reproduce the summary bit-exactly.
inline MonteCarloSummary monte_carlo(const SampledWaveform& f, const ReflectorScene& scene,
                                     const NoiseSpec& noise, int trials, EstimatorKind estimator,
                                     std::uint64_t master_seed, const MonteCarloOptions& options = {})
{
    if (trials < 2) throw std::invalid_argument("monte_carlo: at least 2 trials required");

    SampledWaveform clean = [&] {
        if (options.multipath) {
            const auto ladder = multipath_echo(f, *options.multipath);
            SampledWaveform out = ladder.signal;
            for (auto& v : out.samples) v *= 0.5 * scene.amplitude;
            return out;
        }
        return two_reflector_echo(f, scene);
    }();

    MonteCarloSummary summary;
    summary.trials = trials;
    summary.master_seed = master_seed;
    summary.true_separation = options.multipath ? options.multipath->stub_roundtrip : scene.separation;
    summary.crb_l = fisher_multiparam(f, scene, noise).crb_l;

    double l_lo = options.grid_l_min, l_hi = options.grid_l_max;
    if (!(l_hi > l_lo)) {
        l_lo = 0.25 * summary.true_separation;
        l_hi = 1.75 * summary.true_separation;
    }

    std::optional<detail::MleTemplate> tmpl;
    if (estimator == EstimatorKind::mle) tmpl.emplace(f);

    std::vector<double> estimates;
    estimates.reserve(static_cast<std::size_t>(trials));
    int clamped = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const auto noisy = add_noise(clean, noise, rng::derive_seed(master_seed, static_cast<std::uint64_t>(trial)));
        try {
            const EstimateResult est = estimator == EstimatorKind::mle
                                           ? detail::mle_estimate_impl(noisy, *tmpl)
                                           : grid_search_rmse(noisy, f, l_lo, l_hi, options.grid_steps);
            estimates.push_back(est.l_hat);
            if (est.clamped) ++clamped;
        } catch (const std::exception&) {
            ++summary.failures;
        }
    }

    const auto m = static_cast<double>(estimates.size());
    if (estimates.size() < 2) {
        summary.mean_l_hat = summary.var_l_hat = summary.bias =
            std::numeric_limits<double>::quiet_NaN();
        summary.clamp_rate = estimates.empty() ? 0.0 : static_cast<double>(clamped) / m;
        return summary;
    }
    double mean = 0.0;
    for (double v : estimates) mean += v;
    mean /= m;
    double var = 0.0;
    for (double v : estimates) var += (v - mean) * (v - mean);
    var /= (m - 1.0);

    summary.mean_l_hat = mean;
    summary.var_l_hat = var;
    summary.bias = mean - summary.true_separation;
    summary.clamp_rate = static_cast<double>(clamped) / m;
    return summary;
}

} // namespace rangekit
