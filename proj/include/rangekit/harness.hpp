#pragma once

// Command implementations behind the CLI: pulse synthesis, figure-of-merit
// curves, Fisher reports, echo simulation, one-shot estimation, and the
// Monte Carlo sweep. Everything is driven by an ExperimentConfig and writes
// plain CSV/JSON files; outputs carry no timestamps, so identical
// config + seed reproduces byte-identical files.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "rangekit/config.hpp"
#include "rangekit/echo.hpp"
#include "rangekit/estimation.hpp"
#include "rangekit/fisher.hpp"
#include "rangekit/io.hpp"
#include "rangekit/pulse_design.hpp"

namespace rangekit::harness {

namespace fs = std::filesystem;

struct BuiltPulse {
    SampledWaveform waveform;                 // unit power on the band grid
    std::optional<LegendrePulse> coefficients; // legendre kinds only
    double figure = 0.0;                       // eigen R, <u^2>, or analytic comb R
    std::optional<double> sampled_r;           // spectrum-path R (symmetric bands)
    double out_of_band = 0.0;
};

namespace detail {

inline std::size_t default_count(const ExperimentConfig& cfg)
{
    return cfg.grid_count.value_or(std::size_t{1} << 16);
}

// periodized three-tooth comb with the teeth exactly on DFT bins
inline SampledWaveform sampled_comb(double k0, std::size_t count)
{
    const std::size_t per = 32; // samples per carrier period, 16x Nyquist
    const std::size_t n = std::max<std::size_t>(per, count - count % per);
    const double dt = 2.0 * std::numbers::pi / (static_cast<double>(per) * k0);
    cvector s(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        s[i] = std::cos(k0 * t) + 1.0 / std::numbers::sqrt2;
    }
    return SampledWaveform(0.0, dt, std::move(s)).renormalized();
}

} // namespace detail

/// Realizes the configured pulse on its band grid.
inline BuiltPulse build_pulse(const ExperimentConfig& cfg)
{
    const BandSpec band = cfg.band();
    const std::size_t count = detail::default_count(cfg);
    BuiltPulse out;

    switch (cfg.pulse_kind) {
    case PulseKind::legendre_optimal: {
        const auto opt = optimize_pulse(cfg.pulse_truncation, cfg.pulse_power);
        // dimensionless grid chosen so the shifted carrier stays 8x oversampled
        double dt0 = cfg.grid_dt ? *cfg.grid_dt * band.bandwidth() / 2.0
                                 : std::min(std::numbers::pi / 8.0,
                                            std::numbers::pi * band.bandwidth()
                                                / (16.0 * std::abs(band.k_upper)));
        const double t0 = -0.5 * static_cast<double>(count) * dt0;
        const auto unit = synthesize_time(opt.pulse, t0, dt0, count);
        out.waveform = shift_band(unit, band).renormalized();
        out.coefficients = opt.pulse;
        out.figure = opt.figure;
        break;
    }
    case PulseKind::sinc_cosine: {
        if (!band.symmetric())
            throw ConfigError("pulse.kind: sinc_cosine requires a symmetric band");
        const double k0 = band.k_upper;
        const double dt = cfg.grid_dt.value_or(std::numbers::pi / (8.0 * k0));
        const double t0 = -0.5 * static_cast<double>(count) * dt;
        out.waveform = sinc_cosine_pulse(cfg.pulse_d, k0, t0, dt, count);
        out.figure = 0.0; // filled from the spectrum below
        break;
    }
    case PulseKind::comb: {
        if (!band.symmetric())
            throw ConfigError("pulse.kind: a sampled comb waveform requires a symmetric band "
                              "(shifted-band combs are analytic only; see the synth command)");
        out.waveform = detail::sampled_comb(band.k_upper, count);
        out.figure = 1.0; // 4 Var / k0^4 with Var = k0^4 / 4
        break;
    }
    }

    if (band.symmetric()) {
        const auto r = resolving_power(out.waveform, band);
        out.sampled_r = r.value;
        out.out_of_band = r.out_of_band;
        if (cfg.pulse_kind == PulseKind::sinc_cosine) out.figure = r.value;
    }
    return out;
}

/// Clean mean return for the configured scene (ideal pair or multipath ladder).
inline SampledWaveform build_clean_echo(const ExperimentConfig& cfg, const SampledWaveform& f,
                                        const ReflectorScene& scene)
{
    if (cfg.multipath_enabled) {
        const CableNetwork net(scene.separation, cfg.multipath_reflectance,
                               cfg.multipath_attenuation, cfg.multipath_truncation);
        auto ladder = multipath_echo(f, net);
        for (auto& v : ladder.signal.samples) v *= 0.5 * scene.amplitude;
        return ladder.signal;
    }
    return two_reflector_echo(f, scene);
}

inline ReflectorScene scene_for(const ExperimentConfig& cfg)
{
    // the grid-search model pins the direct copy at zero delay
    const double offset = cfg.estimator_kind == EstimatorKind::grid
                              ? -0.5 * cfg.scene_separation
                              : cfg.scene_offset;
    return ReflectorScene(cfg.scene_amplitude, offset, cfg.scene_separation);
}

inline const char* pulse_kind_name(PulseKind kind)
{
    switch (kind) {
    case PulseKind::legendre_optimal: return "legendre_optimal";
    case PulseKind::sinc_cosine: return "sinc_cosine";
    case PulseKind::comb: return "comb";
    }
    return "?";
}

inline const char* vtau_convention_name(const ExperimentConfig& cfg)
{
    return cfg.vtau_convention == VtauConvention::inverse_bandedge ? "inverse_bandedge"
                                                                   : "inverse_bandedge_2pi";
}

inline io::json pulse_id_json(const ExperimentConfig& cfg)
{
    io::json id{{"kind", pulse_kind_name(cfg.pulse_kind)}};
    if (cfg.pulse_kind == PulseKind::legendre_optimal) {
        id["truncation"] = cfg.pulse_truncation;
        id["power"] = cfg.pulse_power;
    }
    if (cfg.pulse_kind == PulseKind::sinc_cosine) id["d"] = cfg.pulse_d;
    return id;
}

inline void run_synth(const ExperimentConfig& cfg, const fs::path& out_dir)
{
    const BandSpec band = cfg.band();
    io::json meta;
    meta["band"] = {{"k_lower", band.k_lower}, {"k_upper", band.k_upper}};
    meta["vtau_convention"] = vtau_convention_name(cfg);

    const auto comb = optimal_wave_comb(band);
    io::json teeth = io::json::array();
    for (const auto& tooth : comb.teeth) teeth.push_back({{"k", tooth.k}, {"amplitude", tooth.amplitude}});
    meta["optimal_wave"] = {{"teeth", teeth}, {"max_variance", comb.max_variance}};

    if (cfg.pulse_kind == PulseKind::comb && !band.symmetric()) {
        // analytic listing only; no finite-energy waveform exists for the bare comb
        meta["pulse"] = {{"kind", "comb"}, {"analytic_only", true}};
        io::write_file((out_dir / "metadata.json").string(), meta.dump(2) + "\n");
        std::cout << "synth: wrote analytic comb metadata\n";
        return;
    }

    const BuiltPulse built = build_pulse(cfg);
    meta["pulse"]["kind"] = pulse_kind_name(cfg.pulse_kind);
    meta["pulse"]["figure_of_merit"] = built.figure;
    if (built.sampled_r) meta["pulse"]["r_sampled_spectrum"] = *built.sampled_r;
    meta["pulse"]["out_of_band_power_fraction"] = built.out_of_band;
    meta["grid"] = {{"t_start", built.waveform.t_start},
                    {"dt", built.waveform.dt},
                    {"count", built.waveform.size()}};
    if (cfg.pulse_kind == PulseKind::legendre_optimal) {
        meta["pulse"]["truncation"] = cfg.pulse_truncation;
        meta["pulse"]["power"] = cfg.pulse_power;
        io::write_file((out_dir / "coefficients.json").string(),
                       io::pulse_to_json(*built.coefficients, band).dump(2) + "\n");
    }
    if (cfg.pulse_kind == PulseKind::sinc_cosine) meta["pulse"]["d"] = cfg.pulse_d;

    io::write_file((out_dir / "waveform.csv").string(), io::waveform_to_csv(built.waveform));
    io::write_file((out_dir / "metadata.json").string(), meta.dump(2) + "\n");
    std::cout << "synth: figure of merit " << built.figure << "\n";
}

inline void run_curves(const ExperimentConfig& cfg, const fs::path& out_dir)
{
    std::string n_csv = "N,R\n";
    for (const auto& [n, r] : r_vs_n_curve(cfg.curves_n_max))
        n_csv += std::to_string(n) + "," + io::format_double(r) + "\n";
    io::write_file((out_dir / "r_vs_n.csv").string(), n_csv);

    const std::size_t count = detail::default_count(cfg);
    const double dt = std::numbers::pi / 8.0;
    const double t0 = -0.5 * static_cast<double>(count) * dt;
    std::string d_csv = "d,R\n";
    for (int i = 0; i < cfg.curves_d_steps; ++i) {
        const double d = cfg.curves_d_min
                         + (cfg.curves_d_max - cfg.curves_d_min) * static_cast<double>(i)
                               / static_cast<double>(cfg.curves_d_steps - 1);
        const auto w = sinc_cosine_pulse(d, 1.0, t0, dt, count);
        d_csv += io::format_double(d) + ","
                 + io::format_double(resolving_power(w, BandSpec(-1.0, 1.0)).value) + "\n";
    }
    io::write_file((out_dir / "r_vs_d.csv").string(), d_csv);
    std::cout << "curves: wrote r_vs_n.csv and r_vs_d.csv\n";
}

inline void run_fisher(const ExperimentConfig& cfg, const fs::path& out_dir)
{
    const BuiltPulse built = build_pulse(cfg);
    const auto& f = built.waveform;
    const NoiseSpec noise(cfg.sigma2_for(f.dt), f.dt);
    const ReflectorScene scene(cfg.scene_amplitude, cfg.scene_offset, cfg.scene_separation);

    io::json report;
    report["pulse"] = pulse_id_json(cfg);
    report["vtau_convention"] = vtau_convention_name(cfg);
    report["scene"] = {{"amplitude", scene.amplitude},
                       {"offset", scene.offset},
                       {"separation", scene.separation}};
    report["noise"] = {{"sigma2", noise.sigma2}, {"dx", noise.dx}, {"sigma_prime_sq", noise.continuum()}};
    report["grid"] = {{"dt", f.dt}, {"count", f.size()}};

    try {
        const double exact = fisher_exact(f, scene.separation, noise);
        const double small = fisher_small_l(f, scene.separation, noise);
        report["fisher_exact"] = exact;
        report["fisher_small_l"] = small;
        report["exact_vs_small_l_relative_difference"] =
            small != 0.0 ? std::abs(exact - small) / small : 0.0;

        const auto multi = fisher_multiparam(f, scene, noise);
        report["multiparameter"] = io::fisher_report_to_json(multi);
        const auto bounds = crb(multi, cfg.trials);
        report["crb"] = {{"repetitions", cfg.trials},
                         {"var_A", bounds[0]},
                         {"var_x0", bounds[1]},
                         {"var_l", bounds[2]}};
    } catch (const DegenerateError& e) {
        report["error"] = {{"kind", "degeneracy"}, {"message", e.what()}};
        io::write_file((out_dir / "fisher_report.json").string(), report.dump(2) + "\n");
        throw;
    }
    io::write_file((out_dir / "fisher_report.json").string(), report.dump(2) + "\n");
    std::cout << "fisher: wrote fisher_report.json\n";
}

inline void run_simulate(const ExperimentConfig& cfg, const fs::path& out_dir)
{
    const BuiltPulse built = build_pulse(cfg);
    const ReflectorScene scene = scene_for(cfg);
    const auto clean = build_clean_echo(cfg, built.waveform, scene);
    io::write_file((out_dir / "echo.csv").string(), io::waveform_to_csv(clean));

    const NoiseSpec noise(cfg.sigma2_for(clean.dt), clean.dt);
    const auto noisy = add_noise(clean, noise, cfg.master_seed);
    io::write_file((out_dir / "echo_noisy.csv").string(), io::waveform_to_csv(noisy));
    std::cout << "simulate: wrote echo.csv and echo_noisy.csv\n";
}

inline void run_estimate(const ExperimentConfig& cfg, const fs::path& out_dir)
{
    const BuiltPulse built = build_pulse(cfg);
    const auto& f = built.waveform;

    SampledWaveform signal = [&] {
        if (!cfg.estimate_signal_csv.empty())
            return io::waveform_from_csv(io::read_file(cfg.estimate_signal_csv));
        const ReflectorScene scene = scene_for(cfg);
        const auto clean = build_clean_echo(cfg, f, scene);
        const NoiseSpec noise(cfg.sigma2_for(clean.dt), clean.dt);
        return add_noise(clean, noise, cfg.master_seed);
    }();

    EstimateResult est;
    if (cfg.estimator_kind == EstimatorKind::mle) {
        est = mle_estimate(signal, f);
    } else {
        double lo = cfg.estimator_grid_min, hi = cfg.estimator_grid_max;
        if (!(hi > lo)) {
            lo = 0.25 * cfg.scene_separation;
            hi = 1.75 * cfg.scene_separation;
        }
        est = grid_search_rmse(signal, f, lo, hi, cfg.estimator_grid_steps);
    }

    io::json j{{"estimator", cfg.estimator_kind == EstimatorKind::mle ? "mle" : "grid"},
               {"l_hat", est.l_hat},
               {"l_hat_squared", est.l_hat_squared},
               {"clamped", est.clamped},
               {"objective_rmse", est.objective},
               {"boundary_warning", est.boundary_warning},
               {"conditioning_warning", est.conditioning_warning}};
    auto set_or_null = [&](const char* key, double v) {
        if (std::isnan(v)) j[key] = nullptr;
        else j[key] = v;
    };
    set_or_null("a_hat", est.a_hat);
    set_or_null("x0_hat", est.x0_hat);
    set_or_null("c0_hat", est.c0_hat);
    set_or_null("c1_hat", est.c1_hat);
    io::write_file((out_dir / "estimate.json").string(), j.dump(2) + "\n");
    std::cout << "estimate: l_hat = " << est.l_hat << "\n";
}

inline void run_montecarlo(const ExperimentConfig& cfg, const fs::path& out_dir)
{
    const double l = cfg.scene_separation;
    std::vector<double> sweep = cfg.sweep_l_over_vtau;
    if (sweep.empty()) sweep.push_back(l / cfg.v_tau(cfg.band().k_upper));

    // the normalization unit is recorded so the axes are reproducible
    std::string csv = std::string("# vtau_convention = ") + vtau_convention_name(cfg) + "\n"
                      + io::montecarlo_csv_header() + "\n";
    io::json failures = io::json::array();

    for (std::size_t cell = 0; cell < sweep.size(); ++cell) {
        const double target = sweep[cell];
        try {
            if (!(target > 0.0)) throw ConfigError("sweep.l_over_vtau: values must be positive");
            // l is held fixed; the band edge realizes the requested l / V_tau
            const double c = cfg.vtau_convention == VtauConvention::inverse_bandedge
                                 ? 1.0
                                 : 2.0 * std::numbers::pi;
            const double k_upper = c * target / l;
            ExperimentConfig cell_cfg = cfg;
            cell_cfg.band_k_lower = -k_upper;
            cell_cfg.band_k_upper = k_upper;
            const BuiltPulse built = build_pulse(cell_cfg);
            const auto& f = built.waveform;

            const ReflectorScene scene = scene_for(cell_cfg);
            const NoiseSpec noise(cfg.sigma2_for(f.dt), f.dt);

            MonteCarloOptions options;
            options.grid_l_min = cfg.estimator_grid_min;
            options.grid_l_max = cfg.estimator_grid_max;
            options.grid_steps = cfg.estimator_grid_steps;
            if (cfg.multipath_enabled)
                options.multipath = CableNetwork(l, cfg.multipath_reflectance,
                                                 cfg.multipath_attenuation, cfg.multipath_truncation);

            const auto summary = monte_carlo(f, scene, noise, cfg.trials, cfg.estimator_kind,
                                             rng::derive_seed(cfg.master_seed, cell), options);
            csv += io::montecarlo_csv_row(target, cfg.v_tau(k_upper), summary) + "\n";
            if (summary.failures > 0)
                failures.push_back({{"cell", cell},
                                    {"l_over_vtau", target},
                                    {"failed_trials", summary.failures}});
        } catch (const std::exception& e) {
            std::cerr << "montecarlo: cell " << cell << " (l/V_tau = " << target
                      << ") failed: " << e.what() << "\n";
            failures.push_back({{"cell", cell}, {"l_over_vtau", target}, {"error", e.what()}});
        }
    }

    io::write_file((out_dir / "montecarlo.csv").string(), csv);
    if (!failures.empty())
        io::write_file((out_dir / "montecarlo_failures.json").string(), failures.dump(2) + "\n");
    std::cout << "montecarlo: wrote montecarlo.csv (" << sweep.size() << " cells)\n";
}

} // namespace rangekit::harness
