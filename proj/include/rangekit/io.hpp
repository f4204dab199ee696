#pragma once

// File formats: waveform CSV (`t,re,im`), pulse-coefficient JSON, Fisher
// report JSON, Monte Carlo summary CSV. Doubles are printed with 17
// significant digits so every file re-parses to the exact in-memory value.

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rangekit/estimation.hpp"
#include "rangekit/fisher.hpp"
#include "rangekit/pulse_design.hpp"
#include "rangekit/waveform.hpp"

namespace rangekit::io {

using json = nlohmann::json;

inline std::string format_double(double v)
{
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

inline std::string waveform_to_csv(const SampledWaveform& w)
{
    std::ostringstream out;
    out << waveform_csv_header() << "\n";
    for (std::size_t i = 0; i < w.size(); ++i)
        out << format_double(w.time(i)) << "," << format_double(w.samples[i].real()) << ","
            << format_double(w.samples[i].imag()) << "\n";
    return out.str();
}

inline SampledWaveform waveform_from_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != waveform_csv_header())
        throw std::runtime_error("waveform CSV: missing 't,re,im' header");

    double t0 = 0.0, t1 = 0.0;
    cvector samples;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        double t = 0.0, re = 0.0, im = 0.0;
        char c1 = 0, c2 = 0;
        if (!(row >> t >> c1 >> re >> c2 >> im) || c1 != ',' || c2 != ',')
            throw std::runtime_error("waveform CSV: bad row '" + line + "'");
        if (samples.empty()) t0 = t;
        else if (samples.size() == 1) t1 = t;
        samples.emplace_back(re, im);
    }
    if (samples.size() < 2) throw std::runtime_error("waveform CSV: need at least 2 samples");
    return SampledWaveform(t0, t1 - t0, std::move(samples));
}

inline json pulse_to_json(const LegendrePulse& pulse, const BandSpec& band)
{
    json coeffs = json::array();
    for (std::size_t n = 0; n < pulse.coeffs.size(); ++n)
        coeffs.push_back({{"n", n}, {"re", pulse.coeffs[n].real()}, {"im", pulse.coeffs[n].imag()}});
    return json{{"truncation", pulse.coeffs.size()},
                {"band", {{"k_lower", band.k_lower}, {"k_upper", band.k_upper}}},
                {"coefficients", coeffs}};
}

inline LegendrePulse pulse_from_json(const json& j)
{
    LegendrePulse pulse;
    const auto n = j.at("truncation").get<std::size_t>();
    pulse.coeffs.assign(n, cdouble(0.0, 0.0));
    for (const auto& entry : j.at("coefficients")) {
        const auto idx = entry.at("n").get<std::size_t>();
        if (idx >= n) throw std::runtime_error("pulse JSON: coefficient index out of range");
        pulse.coeffs[idx] = cdouble(entry.at("re").get<double>(), entry.at("im").get<double>());
    }
    return pulse;
}

inline json fisher_report_to_json(const FisherReport& report)
{
    json matrix = json::array();
    for (std::size_t i = 0; i < 3; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < 3; ++j) row.push_back(report.matrix(i, j));
        matrix.push_back(row);
    }
    return json{{"parameter_order", {"A", "x0", "l"}},
                {"matrix", matrix},
                {"inverse_al_block",
                 {{"AA", report.inverse_al[0]}, {"Al", report.inverse_al[1]}, {"ll", report.inverse_al[2]}}},
                {"crb_l", report.crb_l},
                {"repetitions", report.repetitions},
                {"noise",
                 {{"sigma_prime_sq", report.sigma_prime_sq},
                  {"amplitude", report.amplitude},
                  // the normalized-signal analysis of the same scenario uses
                  // Sigma^2 = Sigma'^2 / A^2
                  {"sigma_sq_normalized_convention",
                   report.sigma_prime_sq / (report.amplitude * report.amplitude)}}},
                {"separation", report.separation},
                {"var_p2", report.var_p2_value},
                {"grad_energy", report.grad_energy},
                {"curv_energy", report.curv_energy}};
}

inline std::string montecarlo_csv_header()
{
    return "l_over_Vtau,mean_lhat_over_Vtau,var_lhat,crb,bias,clamp_rate,M,seed";
}

inline std::string montecarlo_csv_row(double l_over_vtau, double v_tau, const MonteCarloSummary& s)
{
    std::ostringstream out;
    out << format_double(l_over_vtau) << "," << format_double(s.mean_l_hat / v_tau) << ","
        << format_double(s.var_l_hat) << "," << format_double(s.crb_l) << ","
        << format_double(s.bias) << "," << format_double(s.clamp_rate) << "," << s.trials << ","
        << s.master_seed;
    return out.str();
}

inline void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace rangekit::io
