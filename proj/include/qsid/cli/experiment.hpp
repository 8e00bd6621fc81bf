// experiment.hpp: Turns an ExperimentConfig into models, states and traces

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "qsid/cli/config.hpp"

namespace qsid::cli {

// One model at one truncation, with its initial state and observable.
struct ModelInstance {
    ModelSpec model;
    DensityMatrix rho0 = DensityMatrix::unchecked(ComplexMatrix::Identity(1, 1));
    ComplexMatrix observable;
    std::vector<double> theta_truth;  // empty when no truth is known
};

struct Experiment {
    ModelInstance truth;           // generates y-hat
    ModelInstance identification;  // fitted
    std::vector<std::vector<double>> starts;  // in identification unknown order
};

Experiment build_experiment(const ExperimentConfig& config);

// The identification model at a different oscillator truncation (JC resonator
// or every ancilla); nullopt for generic models.
std::optional<ModelInstance> at_truncation(const ExperimentConfig& config, std::size_t n_levels);

// Orders `values` by `names`; every name must be present exactly once.
std::vector<double> order_values(const NamedValues& values, const std::vector<std::string>& names,
                                 const std::string& what);

ComplexMatrix build_operator(const OperatorExpr& expr, const HilbertSpace& space);

// y-hat: read from measured.file, or simulated from the truth model, then
// Gaussian noise when noise.sigma > 0 (mt19937_64 seeded with noise.seed).
ObservableTrace measured_trace(const ExperimentConfig& config, const Experiment& experiment);

// Reads a `t,y` table; t must match the grid to 1e-9.
ObservableTrace read_trace_file(const std::filesystem::path& path, const SamplingGrid& grid);

} // namespace qsid::cli
