// test_spectral.cpp: DFT amplitudes, peak picking, guesses and spectrum curves

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "qsid/spectral.hpp"
#include "test_support.hpp"

using namespace qsid;
using namespace qsid::spectral;

namespace {

ObservableTrace tones(const SamplingGrid& grid, const std::vector<std::pair<double, double>>& parts,
                      double offset = 0.0) {
    ObservableTrace t;
    for (std::size_t k = 1; k <= grid.samples; ++k) {
        double y = offset;
        for (const auto& [amp, w] : parts) y += amp * std::cos(w * grid.time(k));
        t.values.push_back(y);
    }
    return t;
}

double bin(const SamplingGrid& g, double j) { return 2.0 * std::numbers::pi * j / g.duration(); }

} // namespace

TEST_CASE("dft_trace layout and examples") {
    const SamplingGrid grid{.dt = 0.01, .samples = 1000};
    const auto flat = dft_trace(tones(grid, {}, 0.7), grid);
    CHECK(flat.frequencies.size() == 501);
    CHECK(flat.frequencies.front() == 0.0);
    CHECK(flat.frequencies.back() == doctest::Approx(std::numbers::pi / grid.dt));
    CHECK(flat.bin_width == doctest::Approx(bin(grid, 1)));
    for (std::size_t j = 1; j < flat.frequencies.size(); ++j)
        CHECK(flat.frequencies[j] > flat.frequencies[j - 1]);
    for (double a : flat.amplitudes) CHECK(a < 1e-12);

    const auto pure = dft_trace(tones(grid, {{1.0, bin(grid, 16)}}), grid);
    std::size_t argmax = 0;
    for (std::size_t j = 0; j < pure.amplitudes.size(); ++j)
        if (pure.amplitudes[j] > pure.amplitudes[argmax]) argmax = j;
    CHECK(argmax == 16);
    for (std::size_t j = 0; j < pure.amplitudes.size(); ++j)
        if (j != 16) CHECK(pure.amplitudes[j] < 1e-10 * pure.amplitudes[16]);

    CHECK_THROWS_AS(dft_trace(tones({.dt = 0.1, .samples = 7}, {}), {.dt = 0.1, .samples = 7}),
                    std::invalid_argument);
    CHECK_THROWS_AS(dft_trace(tones(grid, {}), {.dt = 0.01, .samples = 999}), std::invalid_argument);
}

TEST_CASE("Parseval") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    for (std::size_t k : {8u, 9u, 100u, 1001u}) {
        const SamplingGrid grid{.dt = 0.02, .samples = k};
        ObservableTrace t;
        double mean = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            t.values.push_back(n(rng) + 3.0);
            mean += t.values.back();
        }
        mean /= double(k);
        double var = 0.0;
        for (double v : t.values) var += (v - mean) * (v - mean);
        var /= double(k);
        const auto s = dft_trace(t, grid);
        double energy = 0.0;
        for (std::size_t j = 0; j < s.amplitudes.size(); ++j) {
            const bool unpaired = j == 0 || (k % 2 == 0 && j == k / 2);
            energy += (unpaired ? 1.0 : 2.0) * s.amplitudes[j] * s.amplitudes[j];
        }
        CHECK(std::abs(energy - double(k) * var) <= 1e-9 * double(k) * var);
    }
}

TEST_CASE("detect_peaks") {
    const SamplingGrid grid{.dt = 0.01, .samples = 1000};
    const auto on_bin = detect_peaks(dft_trace(tones(grid, {{1.0, bin(grid, 40)}}), grid));
    REQUIRE(on_bin.size() == 1);
    CHECK(on_bin[0].frequency == doctest::Approx(bin(grid, 40)).epsilon(1e-12));

    for (double frac : {0.1, 0.25, 0.4}) {
        const double w = bin(grid, 40.0 + frac);
        const auto spec = dft_trace(tones(grid, {{1.0, w}}), grid);
        const auto peaks = detect_peaks(spec);
        REQUIRE_FALSE(peaks.empty());
        CHECK(std::abs(peaks[0].frequency - w) <= 0.3 * spec.bin_width);
    }

    const auto two = detect_peaks(dft_trace(tones(grid, {{1.0, bin(grid, 30)}, {0.6, bin(grid, 33)}}), grid));
    REQUIRE(two.size() == 2);
    CHECK(two[0].frequency == doctest::Approx(bin(grid, 30)).epsilon(1e-9));
    CHECK(two[1].frequency == doctest::Approx(bin(grid, 33)).epsilon(1e-9));
    CHECK(two[0].amplitude > two[1].amplitude);

    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 0.2);
    auto noisy = tones(grid, {{1.0, bin(grid, 70)}, {0.5, bin(grid, 120)}});
    for (auto& v : noisy.values) v += n(rng);
    const auto spec = dft_trace(noisy, grid);
    const auto only = detect_peaks(spec, 0.99);
    REQUIRE(only.size() == 1);
    CHECK(only[0].frequency == doctest::Approx(bin(grid, 70)).epsilon(0.01));

    CHECK(detect_peaks(AmplitudeSpectrum{}).empty());
    CHECK_THROWS_AS(detect_peaks(spec, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(detect_peaks(spec, 1.0), std::invalid_argument);
}

TEST_CASE("initial_guess on synthetic tones") {
    const SamplingGrid grid{.dt = 0.01, .samples = 2000};
    const auto t = tones(grid, {{1.0, 10.0}, {0.3, 8.5}, {0.2, 12.1}, {0.15, 14.0}});
    const auto report = initial_guess(dft_trace(t, grid), 10.0);
    CHECK(report.status == "ok");
    CHECK(report.suggested_r == 3);
    REQUIRE(report.omega_guesses.size() == 3);
    CHECK(report.omega_guesses[0] == doctest::Approx(8.5).epsilon(0.02));
    CHECK(report.omega_guesses[1] == doctest::Approx(12.1).epsilon(0.02));
    CHECK(report.omega_guesses[2] == doctest::Approx(14.0).epsilon(0.02));
    REQUIRE(report.qubit_peak);
    CHECK(report.qubit_peak->frequency == doctest::Approx(10.0).epsilon(0.01));

    // Scaling the trace changes amplitudes only.
    auto scaled = t;
    for (auto& v : scaled.values) v *= 40.0;
    const auto report2 = initial_guess(dft_trace(scaled, grid), 10.0);
    CHECK(report2.suggested_r == report.suggested_r);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(report2.omega_guesses[i] == doctest::Approx(report.omega_guesses[i]).epsilon(1e-12));
}

TEST_CASE("initial_guess on simulated models") {
    const SamplingGrid grid{.dt = 0.01, .samples = 1000};
    auto decoupled = test::two_lorentzian_truth(2);
    for (auto& a : decoupled.ancillas) a.beta = 0.0;
    const auto flat = test::augmented_problem(decoupled, grid);
    const auto none = initial_guess(dft_trace(flat.measured, grid), 10.0);
    CHECK(none.suggested_r == 0);
    CHECK(none.omega_guesses.empty());
    CHECK(none.status != "ok");

    // Three narrow, well separated ancillas; their lines sit at 2-5% of the qubit line.
    models::AugmentedModelSpec three;
    three.omega_0 = 10.0;
    for (double w : {6.0, 13.0, 16.0})
        three.ancillas.push_back({.omega = w, .gamma_bar = 0.3, .beta = std::nullopt, .mu = -0.5, .n_levels = 2});
    const auto p3 = test::augmented_problem(three, {.dt = 0.01, .samples = 2000});
    const auto r3 = initial_guess(dft_trace(p3.measured, p3.grid), 10.0, 0.01);
    CHECK(r3.suggested_r == 3);
    REQUIRE(r3.omega_guesses.size() == 3);
    CHECK(r3.omega_guesses[0] < 7.0);
    CHECK(r3.omega_guesses[1] > 12.0);
    CHECK(r3.omega_guesses[2] > 15.0);
}

TEST_CASE("reconstruct_spectrum") {
    const auto truth = test::two_lorentzian_truth(4).ancillas;
    const auto same = reconstruct_spectrum(truth, 5.0, 15.0, 101, truth);
    REQUIRE(same.omega.size() == 101);
    CHECK(same.omega.front() == 5.0);
    CHECK(same.omega.back() == 15.0);
    REQUIRE(same.truth);
    CHECK(same.identified == *same.truth);

    // Final identified values as reported for the two-Lorentzian run.
    std::vector<models::AncillaSpec> reported{
        {.omega = 9.0, .gamma_bar = 1.9999, .beta = 3.4998, .mu = std::nullopt, .n_levels = 4},
        {.omega = 11.0, .gamma_bar = 1.5001, .beta = 3.0, .mu = std::nullopt, .n_levels = 4}};
    const auto curve = reconstruct_spectrum(reported, 5.0, 15.0, 1001, truth);
    double worst = 0.0;
    for (std::size_t i = 0; i < curve.omega.size(); ++i)
        worst = std::max(worst, std::abs(curve.identified[i] - (*curve.truth)[i]) / (*curve.truth)[i]);
    CHECK(worst < 0.01);

    const auto single = reconstruct_spectrum({truth[0]}, 8.0, 10.0, 3);
    CHECK_FALSE(single.truth);
    CHECK(single.identified[1] == doctest::Approx(3.5).epsilon(1e-14));
    CHECK_THROWS_AS(reconstruct_spectrum(truth, 5.0, 15.0, 1), std::invalid_argument);
}
