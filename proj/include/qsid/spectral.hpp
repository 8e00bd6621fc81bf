// spectral.hpp: DFT-based ancilla-frequency guesses and spectrum reconstruction

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qsid/lindblad.hpp"
#include "qsid/models.hpp"

namespace qsid::spectral {

enum class Window { rectangular, hann };

Window window_from_string(const std::string& name);
std::string to_string(Window w);

// One-sided amplitude spectrum, omega_j = 2 pi j / (K dt), j = 0..floor(K/2),
// amplitude_j = |X_j| / sqrt(K) where X is the DFT of the mean-removed trace.
struct AmplitudeSpectrum {
    std::vector<double> frequencies;
    std::vector<double> amplitudes;
    double bin_width = 0.0;
    std::size_t samples = 0;
};

// Throws std::invalid_argument for K < 8 or a trace/grid length mismatch.
AmplitudeSpectrum dft_trace(const ObservableTrace& trace, const SamplingGrid& grid,
                            Window window = Window::rectangular);

struct Peak {
    double frequency = 0.0;
    double amplitude = 0.0;
};

// Interior local maxima with amplitude >= min_prominence * max, refined by a
// three-point parabola; sorted by decreasing amplitude.
std::vector<Peak> detect_peaks(const AmplitudeSpectrum& spectrum, double min_prominence = 0.05);

struct GuessReport {
    std::vector<Peak> peaks;              // every detected peak, by amplitude
    std::optional<Peak> qubit_peak;       // the one attributed to the qubit
    std::size_t suggested_r = 0;
    std::vector<double> omega_guesses;    // ascending
    double bin_width = 0.0;
    std::string status = "ok";            // "ok" or a warning
};

// Drops the peak nearest the known qubit frequency; the remaining peaks give
// the ancilla count and their frequency guesses. Damping and coupling guesses
// are left to the user.
GuessReport initial_guess(const AmplitudeSpectrum& spectrum, double known_qubit_omega,
                          double min_prominence = 0.05);

struct SpectrumCurve {
    std::vector<double> omega;
    std::vector<double> identified;
    std::optional<std::vector<double>> truth;
};

SpectrumCurve reconstruct_spectrum(const std::vector<models::AncillaSpec>& identified,
                                   double omega_min, double omega_max, std::size_t n_points,
                                   const std::optional<std::vector<models::AncillaSpec>>& truth = std::nullopt);

} // namespace qsid::spectral
