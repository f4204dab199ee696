#pragma once

// Experiment configuration: a flat key-value text format with dotted section
// names, e.g.
//
//   pulse.kind = legendre_optimal
//   pulse.truncation = 12
//   band.k_upper = 1.0
//
// '#' starts a comment. Unknown keys and invalid values are rejected with the
// offending key in the message, so a typo never turns into a silent default.

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rangekit/estimation.hpp"
#include "rangekit/waveform.hpp"

namespace rangekit {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PulseKind { legendre_optimal, sinc_cosine, comb };
enum class VtauConvention { inverse_bandedge, inverse_bandedge_2pi };

struct ExperimentConfig {
    // pulse
    PulseKind pulse_kind = PulseKind::legendre_optimal;
    int pulse_truncation = 12; // legendre_optimal
    int pulse_power = 2;       // legendre_optimal
    double pulse_d = 50.0;     // sinc_cosine

    // band
    double band_k_lower = -1.0;
    double band_k_upper = 1.0;

    // grid (defaults: dt = pi / (8 k_upper), count = 65536)
    std::optional<double> grid_dt;
    std::optional<std::size_t> grid_count;

    // scene
    double scene_amplitude = 1.0;
    double scene_offset = 0.0;
    double scene_separation = 0.3;

    // noise: exactly one of the two conventions may be given
    std::optional<double> noise_sigma2;          // per sample
    std::optional<double> noise_sigma_prime_sq;  // continuum, dx * sigma2

    // trials
    int trials = 1000;
    std::uint64_t master_seed = 1;

    // estimator
    EstimatorKind estimator_kind = EstimatorKind::mle;
    double estimator_grid_min = 0.0; // <= min defaults to 0.25 l .. 1.75 l
    double estimator_grid_max = 0.0;
    int estimator_grid_steps = 41;

    // sweep of l / V_tau values for montecarlo (empty = single cell at the
    // scene separation and configured band)
    std::vector<double> sweep_l_over_vtau;
    VtauConvention vtau_convention = VtauConvention::inverse_bandedge;

    // multipath
    bool multipath_enabled = false;
    double multipath_reflectance = 0.2;
    double multipath_attenuation = 0.95;
    int multipath_truncation = 25;

    // curves
    int curves_n_max = 40;
    double curves_d_min = 2.0;
    double curves_d_max = 100.0;
    int curves_d_steps = 50;

    // estimate input (empty = simulate internally)
    std::string estimate_signal_csv;

    double v_tau(double k_upper) const
    {
        const double c = vtau_convention == VtauConvention::inverse_bandedge ? 1.0 : 2.0 * std::numbers::pi;
        return c / k_upper;
    }

    BandSpec band() const { return BandSpec(band_k_lower, band_k_upper); }

    /// Per-sample noise power for a given grid spacing. A configured zero is
    /// treated as noiseless (floored to keep NoiseSpec valid).
    double sigma2_for(double dx) const
    {
        double s2 = 1e-6 / dx; // default Sigma'^2 = 1e-6
        if (noise_sigma_prime_sq) s2 = *noise_sigma_prime_sq / dx;
        if (noise_sigma2) s2 = *noise_sigma2;
        return std::max(s2, 1e-300);
    }

    static ExperimentConfig parse(const std::string& text);
    std::string to_text() const;
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

class ConfigReader {
public:
    explicit ConfigReader(const std::string& text)
    {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty() || value.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
            if (entries_.count(key))
                throw ConfigError(key + ": duplicate key");
            entries_[key] = value;
        }
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string take_string(const std::string& key, const std::string& fallback)
    {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        const std::string v = it->second;
        entries_.erase(it);
        return v;
    }

    template <typename T>
    T take_number(const std::string& key, T fallback)
    {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        const T v = parse_number<T>(key, it->second);
        entries_.erase(it);
        return v;
    }

    template <typename T>
    std::optional<T> take_optional(const std::string& key)
    {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        const T v = parse_number<T>(key, it->second);
        entries_.erase(it);
        return v;
    }

    bool take_bool(const std::string& key, bool fallback)
    {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        const std::string v = it->second;
        entries_.erase(it);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError(key + ": expected a boolean, got '" + v + "'");
    }

    // "a,b,c" or "start:stop:count"
    std::vector<double> take_list(const std::string& key)
    {
        auto it = entries_.find(key);
        if (it == entries_.end()) return {};
        const std::string v = it->second;
        entries_.erase(it);

        std::vector<double> out;
        if (v.find(':') != std::string::npos) {
            double start = 0.0, stop = 0.0;
            int count = 0;
            std::istringstream ss(v);
            char c1 = 0, c2 = 0;
            if (!(ss >> start >> c1 >> stop >> c2 >> count) || c1 != ':' || c2 != ':' || count < 1)
                throw ConfigError(key + ": expected 'start:stop:count', got '" + v + "'");
            for (int i = 0; i < count; ++i)
                out.push_back(count == 1 ? start
                                         : start + (stop - start) * static_cast<double>(i)
                                               / static_cast<double>(count - 1));
            return out;
        }
        std::istringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            out.push_back(parse_number<double>(key, item));
        }
        if (out.empty()) throw ConfigError(key + ": empty list");
        return out;
    }

    void reject_unknown() const
    {
        if (!entries_.empty()) throw ConfigError(entries_.begin()->first + ": unknown key");
    }

private:
    template <typename T>
    static T parse_number(const std::string& key, const std::string& text)
    {
        std::istringstream ss(text);
        T value;
        ss >> value;
        if (ss.fail() || !(ss >> std::ws).eof())
            throw ConfigError(key + ": cannot parse '" + text + "'");
        return value;
    }

    std::map<std::string, std::string> entries_;
};

} // namespace detail

inline ExperimentConfig ExperimentConfig::parse(const std::string& text)
{
    detail::ConfigReader reader(text);
    ExperimentConfig cfg;

    const std::string kind = reader.take_string("pulse.kind", "legendre_optimal");
    if (kind == "legendre_optimal") cfg.pulse_kind = PulseKind::legendre_optimal;
    else if (kind == "sinc_cosine") cfg.pulse_kind = PulseKind::sinc_cosine;
    else if (kind == "comb") cfg.pulse_kind = PulseKind::comb;
    else throw ConfigError("pulse.kind: expected legendre_optimal | sinc_cosine | comb, got '" + kind + "'");

    cfg.pulse_truncation = reader.take_number("pulse.truncation", cfg.pulse_truncation);
    if (cfg.pulse_truncation < 1) throw ConfigError("pulse.truncation: must be >= 1");
    cfg.pulse_power = reader.take_number("pulse.power", cfg.pulse_power);
    if (cfg.pulse_power != 1 && cfg.pulse_power != 2) throw ConfigError("pulse.power: must be 1 or 2");
    cfg.pulse_d = reader.take_number("pulse.d", cfg.pulse_d);
    if (!(cfg.pulse_d > 1.0)) throw ConfigError("pulse.d: must exceed 1");

    cfg.band_k_lower = reader.take_number("band.k_lower", cfg.band_k_lower);
    cfg.band_k_upper = reader.take_number("band.k_upper", cfg.band_k_upper);
    if (!(cfg.band_k_upper > cfg.band_k_lower)) throw ConfigError("band.k_upper: must exceed band.k_lower");

    cfg.grid_dt = reader.take_optional<double>("grid.dt");
    if (cfg.grid_dt && !(*cfg.grid_dt > 0.0)) throw ConfigError("grid.dt: must be positive");
    const auto count = reader.take_optional<long long>("grid.count");
    if (count) {
        if (*count < 2) throw ConfigError("grid.count: must be >= 2");
        cfg.grid_count = static_cast<std::size_t>(*count);
    }

    cfg.scene_amplitude = reader.take_number("scene.amplitude", cfg.scene_amplitude);
    if (!(cfg.scene_amplitude > 0.0)) throw ConfigError("scene.amplitude: must be positive");
    cfg.scene_offset = reader.take_number("scene.offset", cfg.scene_offset);
    cfg.scene_separation = reader.take_number("scene.separation", cfg.scene_separation);
    if (cfg.scene_separation < 0.0) throw ConfigError("scene.separation: must be nonnegative");

    cfg.noise_sigma2 = reader.take_optional<double>("noise.sigma2");
    cfg.noise_sigma_prime_sq = reader.take_optional<double>("noise.sigma_prime_sq");
    if (cfg.noise_sigma2 && cfg.noise_sigma_prime_sq)
        throw ConfigError("noise.sigma2: conflicts with noise.sigma_prime_sq; give one");
    if (cfg.noise_sigma2 && *cfg.noise_sigma2 < 0.0) throw ConfigError("noise.sigma2: must be nonnegative");
    if (cfg.noise_sigma_prime_sq && *cfg.noise_sigma_prime_sq < 0.0)
        throw ConfigError("noise.sigma_prime_sq: must be nonnegative");

    cfg.trials = reader.take_number("trials.count", cfg.trials);
    if (cfg.trials < 2) throw ConfigError("trials.count: must be >= 2");
    cfg.master_seed = reader.take_number<std::uint64_t>("trials.master_seed", cfg.master_seed);

    const std::string est = reader.take_string("estimator.kind", "mle");
    if (est == "mle") cfg.estimator_kind = EstimatorKind::mle;
    else if (est == "grid") cfg.estimator_kind = EstimatorKind::grid;
    else throw ConfigError("estimator.kind: expected mle | grid, got '" + est + "'");
    cfg.estimator_grid_min = reader.take_number("estimator.grid_min", cfg.estimator_grid_min);
    cfg.estimator_grid_max = reader.take_number("estimator.grid_max", cfg.estimator_grid_max);
    cfg.estimator_grid_steps = reader.take_number("estimator.grid_steps", cfg.estimator_grid_steps);
    if (cfg.estimator_grid_steps < 2) throw ConfigError("estimator.grid_steps: must be >= 2");

    cfg.sweep_l_over_vtau = reader.take_list("sweep.l_over_vtau");
    const std::string vtau = reader.take_string("vtau.convention", "inverse_bandedge");
    if (vtau == "inverse_bandedge") cfg.vtau_convention = VtauConvention::inverse_bandedge;
    else if (vtau == "inverse_bandedge_2pi") cfg.vtau_convention = VtauConvention::inverse_bandedge_2pi;
    else throw ConfigError("vtau.convention: expected inverse_bandedge | inverse_bandedge_2pi");

    cfg.multipath_enabled = reader.take_bool("multipath.enabled", cfg.multipath_enabled);
    cfg.multipath_reflectance = reader.take_number("multipath.reflectance", cfg.multipath_reflectance);
    if (!(std::abs(cfg.multipath_reflectance) < 1.0))
        throw ConfigError("multipath.reflectance: |r| must be < 1");
    cfg.multipath_attenuation = reader.take_number("multipath.attenuation", cfg.multipath_attenuation);
    if (!(cfg.multipath_attenuation > 0.0 && cfg.multipath_attenuation <= 1.0))
        throw ConfigError("multipath.attenuation: must be in (0, 1]");
    cfg.multipath_truncation = reader.take_number("multipath.truncation", cfg.multipath_truncation);
    if (cfg.multipath_truncation < 1) throw ConfigError("multipath.truncation: must be >= 1");

    cfg.curves_n_max = reader.take_number("curves.n_max", cfg.curves_n_max);
    if (cfg.curves_n_max < 2) throw ConfigError("curves.n_max: must be >= 2");
    cfg.curves_d_min = reader.take_number("curves.d_min", cfg.curves_d_min);
    cfg.curves_d_max = reader.take_number("curves.d_max", cfg.curves_d_max);
    if (!(cfg.curves_d_min > 1.0)) throw ConfigError("curves.d_min: must exceed 1");
    if (!(cfg.curves_d_max > cfg.curves_d_min)) throw ConfigError("curves.d_max: must exceed curves.d_min");
    cfg.curves_d_steps = reader.take_number("curves.d_steps", cfg.curves_d_steps);
    if (cfg.curves_d_steps < 2) throw ConfigError("curves.d_steps: must be >= 2");

    cfg.estimate_signal_csv = reader.take_string("estimate.signal_csv", "");

    reader.reject_unknown();
    return cfg;
}

inline std::string ExperimentConfig::to_text() const
{
    std::ostringstream out;
    out.precision(17);
    out << "pulse.kind = "
        << (pulse_kind == PulseKind::legendre_optimal
                ? "legendre_optimal"
                : pulse_kind == PulseKind::sinc_cosine ? "sinc_cosine" : "comb")
        << "\n";
    out << "pulse.truncation = " << pulse_truncation << "\n";
    out << "pulse.power = " << pulse_power << "\n";
    out << "pulse.d = " << pulse_d << "\n";
    out << "band.k_lower = " << band_k_lower << "\n";
    out << "band.k_upper = " << band_k_upper << "\n";
    if (grid_dt) out << "grid.dt = " << *grid_dt << "\n";
    if (grid_count) out << "grid.count = " << *grid_count << "\n";
    out << "scene.amplitude = " << scene_amplitude << "\n";
    out << "scene.offset = " << scene_offset << "\n";
    out << "scene.separation = " << scene_separation << "\n";
    if (noise_sigma2) out << "noise.sigma2 = " << *noise_sigma2 << "\n";
    if (noise_sigma_prime_sq) out << "noise.sigma_prime_sq = " << *noise_sigma_prime_sq << "\n";
    out << "trials.count = " << trials << "\n";
    out << "trials.master_seed = " << master_seed << "\n";
    out << "estimator.kind = " << (estimator_kind == EstimatorKind::mle ? "mle" : "grid") << "\n";
    out << "estimator.grid_min = " << estimator_grid_min << "\n";
    out << "estimator.grid_max = " << estimator_grid_max << "\n";
    out << "estimator.grid_steps = " << estimator_grid_steps << "\n";
    if (!sweep_l_over_vtau.empty()) {
        out << "sweep.l_over_vtau = ";
        for (std::size_t i = 0; i < sweep_l_over_vtau.size(); ++i)
            out << (i ? "," : "") << sweep_l_over_vtau[i];
        out << "\n";
    }
    out << "vtau.convention = "
        << (vtau_convention == VtauConvention::inverse_bandedge ? "inverse_bandedge"
                                                                : "inverse_bandedge_2pi")
        << "\n";
    out << "multipath.enabled = " << (multipath_enabled ? "true" : "false") << "\n";
    out << "multipath.reflectance = " << multipath_reflectance << "\n";
    out << "multipath.attenuation = " << multipath_attenuation << "\n";
    out << "multipath.truncation = " << multipath_truncation << "\n";
    out << "curves.n_max = " << curves_n_max << "\n";
    out << "curves.d_min = " << curves_d_min << "\n";
    out << "curves.d_max = " << curves_d_max << "\n";
    out << "curves.d_steps = " << curves_d_steps << "\n";
    if (!estimate_signal_csv.empty()) out << "estimate.signal_csv = " << estimate_signal_csv << "\n";
    return out.str();
}

} // namespace rangekit
