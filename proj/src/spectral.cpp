// spectral.cpp: DFT-based ancilla-frequency guesses and spectrum reconstruction

#include "qsid/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <fftw3.h>

namespace qsid::spectral {

Window window_from_string(const std::string& name) {
    if (name == "rectangular") return Window::rectangular;
    if (name == "hann") return Window::hann;
    throw std::invalid_argument("unknown window '" + name + "' (expected rectangular or hann)");
}

std::string to_string(Window w) { return w == Window::hann ? "hann" : "rectangular"; }

AmplitudeSpectrum dft_trace(const ObservableTrace& trace, const SamplingGrid& grid, Window window) {
    grid.validate();
    const std::size_t k = trace.values.size();
    if (k != grid.samples) throw std::invalid_argument("dft_trace: trace length does not match grid");
    if (k < 8) throw std::invalid_argument("dft_trace: need at least 8 samples");

    const double mean = std::accumulate(trace.values.begin(), trace.values.end(), 0.0) / static_cast<double>(k);
    std::vector<double> input(k);
    for (std::size_t n = 0; n < k; ++n) {
        double w = 1.0;
        if (window == Window::hann)
            w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(k - 1));
        input[n] = (trace.values[n] - mean) * w;
    }
    const std::size_t bins = k / 2 + 1;
    std::vector<fftw_complex> output(bins);
    // FFTW planning is not thread-safe; ESTIMATE plans are deterministic.
    fftw_plan plan;
#pragma omp critical(qsid_fftw_plan)
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(k), input.data(), output.data(), FFTW_ESTIMATE);
    fftw_execute(plan);
#pragma omp critical(qsid_fftw_plan)
    fftw_destroy_plan(plan);

    AmplitudeSpectrum s;
    s.samples = k;
    s.bin_width = 2.0 * std::numbers::pi / (static_cast<double>(k) * grid.dt);
    s.frequencies.resize(bins);
    s.amplitudes.resize(bins);
    const double norm = 1.0 / std::sqrt(static_cast<double>(k));
    for (std::size_t j = 0; j < bins; ++j) {
        s.frequencies[j] = s.bin_width * static_cast<double>(j);
        s.amplitudes[j] = std::hypot(output[j][0], output[j][1]) * norm;
    }
    return s;
}

std::vector<Peak> detect_peaks(const AmplitudeSpectrum& spectrum, double min_prominence) {
    if (!(min_prominence > 0.0 && min_prominence < 1.0))
        throw std::invalid_argument("detect_peaks: min_prominence must lie in (0, 1)");
    const auto& a = spectrum.amplitudes;
    std::vector<Peak> peaks;
    if (a.size() < 3) return peaks;
    const double top = *std::max_element(a.begin(), a.end());
    if (!(top > 0.0)) return peaks;
    const double threshold = min_prominence * top;
    for (std::size_t j = 1; j + 1 < a.size(); ++j) {
        if (!(a[j] > a[j - 1] && a[j] >= a[j + 1]) || a[j] < threshold) continue;
        const double alpha = a[j - 1], beta = a[j], gamma = a[j + 1];
        const double denom = alpha - 2.0 * beta + gamma;
        double offset = denom != 0.0 ? 0.5 * (alpha - gamma) / denom : 0.0;
        offset = std::clamp(offset, -0.5, 0.5);
        const double height = beta - 0.25 * (alpha - gamma) * offset;
        peaks.push_back({spectrum.frequencies[j] + offset * spectrum.bin_width, height});
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const Peak& x, const Peak& y) { return x.amplitude > y.amplitude; });
    return peaks;
}

GuessReport initial_guess(const AmplitudeSpectrum& spectrum, double known_qubit_omega,
                          double min_prominence) {
    GuessReport report;
    report.bin_width = spectrum.bin_width;
    report.peaks = detect_peaks(spectrum, min_prominence);
    if (report.peaks.empty()) {
        report.status = "warning: no spectral peaks found";
        return report;
    }
    std::size_t nearest = 0;
    for (std::size_t i = 1; i < report.peaks.size(); ++i)
        if (std::abs(report.peaks[i].frequency - known_qubit_omega) <
            std::abs(report.peaks[nearest].frequency - known_qubit_omega))
            nearest = i;
    report.qubit_peak = report.peaks[nearest];
    for (std::size_t i = 0; i < report.peaks.size(); ++i)
        if (i != nearest) report.omega_guesses.push_back(report.peaks[i].frequency);
    std::sort(report.omega_guesses.begin(), report.omega_guesses.end());
    report.suggested_r = report.omega_guesses.size();
    if (report.suggested_r == 0) report.status = "warning: only the qubit line was found";
    return report;
}

SpectrumCurve reconstruct_spectrum(const std::vector<models::AncillaSpec>& identified,
                                   double omega_min, double omega_max, std::size_t n_points,
                                   const std::optional<std::vector<models::AncillaSpec>>& truth) {
    if (n_points < 2) throw std::invalid_argument("reconstruct_spectrum: n_points must be >= 2");
    if (!(omega_max > omega_min)) throw std::invalid_argument("reconstruct_spectrum: empty omega range");
    const auto s_id = models::LorentzianSpectrum::from_ancillas(identified);
    std::optional<models::LorentzianSpectrum> s_truth;
    if (truth) s_truth = models::LorentzianSpectrum::from_ancillas(*truth);

    SpectrumCurve curve;
    curve.omega.resize(n_points);
    curve.identified.resize(n_points);
    if (s_truth) curve.truth.emplace(n_points);
    const double step = (omega_max - omega_min) / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double w = omega_min + step * static_cast<double>(i);
        curve.omega[i] = w;
        curve.identified[i] = models::spectrum_eval(s_id, w);
        if (s_truth) (*curve.truth)[i] = models::spectrum_eval(*s_truth, w);
    }
    return curve;
}

} // namespace qsid::spectral
