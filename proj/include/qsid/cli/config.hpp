// config.hpp: Experiment configuration: YAML schema, validation, effective echo

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsid/ident.hpp"
#include "qsid/models.hpp"
#include "qsid/spectral.hpp"

namespace qsid::cli {

// Schema or value error; `line` is 1-based when the offending node is known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, std::optional<std::size_t> line = std::nullopt);
    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    std::optional<std::size_t> line_;
};

// coefficient * (op_0 (x) op_1 (x) ...), one local operator name per factor.
// Names: identity, x, y, z, plus, minus (qubits); a, adag, n (any factor).
struct OperatorProduct {
    Complex coefficient{1.0, 0.0};
    std::vector<std::string> ops;
};
using OperatorExpr = std::vector<OperatorProduct>;

struct GenericTerm {
    std::string name;
    OperatorExpr op;
    std::optional<double> value;          // known coefficient or rate
    std::optional<std::string> unknown;   // name of the theta entry driving this term
    std::optional<double> truth;          // value used to synthesize y-hat
};

struct GenericModelConfig {
    std::vector<std::size_t> factor_dims;
    // Per factor: excited, ground, plus_x, minus_x (qubits), vacuum, fock:<k>, mixed.
    std::vector<std::string> initial_state;
    OperatorExpr observable;
    std::vector<GenericTerm> hamiltonian;
    std::vector<GenericTerm> dissipators;
};

enum class ModelKind { jc, augmented, generic };
std::string to_string(ModelKind k);

struct ModelConfig {
    ModelKind kind = ModelKind::jc;
    models::JaynesCummingsSpec jc;             // truth, with truth truncation
    std::size_t jc_identification_levels = 8;
    models::AugmentedModelSpec augmented;      // truth
    std::size_t augmented_identification_levels = 4;
    GenericModelConfig generic;
};

struct DescentSection {
    double step_size = 2e-4;
    std::map<std::string, double> step_size_overrides;  // per unknown
    std::size_t max_iters = 40000;
    std::optional<double> objective_tolerance = 1e-10;
    GradientMethod gradient_method = GradientMethod::paper_approx;
    bool clamp_rates = true;
    std::size_t dense_threshold = 4096;
    double fd_step = 1e-5;
};

// An ordered list of (unknown name, value).
using NamedValues = std::vector<std::pair<std::string, double>>;

struct ExperimentConfig {
    ModelConfig model;
    SamplingGrid grid;
    std::optional<std::filesystem::path> measured_file;  // absolute after loading
    double noise_sigma = 0.0;
    std::uint64_t noise_seed = 0;
    DescentSection descent;
    std::vector<NamedValues> starts;
    std::optional<std::size_t> consistency_levels;
    std::optional<double> guess_qubit_omega;
    double guess_min_prominence = 0.05;
    spectral::Window guess_window = spectral::Window::rectangular;
    double spectrum_omega_min = 5.0;
    double spectrum_omega_max = 15.0;
    std::size_t spectrum_points = 1001;
    std::optional<std::vector<models::AncillaSpec>> spectrum_ancillas;
    std::optional<NamedValues> gradcheck_theta;
    double gradcheck_fd_step = 1e-5;
    bool gradcheck_halving = true;
    std::optional<std::filesystem::path> output_dir;
    bool write_states = true;
};

// Parses and validates. Relative paths resolve against `base_dir`. Unset
// sections take the defaults of `kind` (stated truth, Table-style starts).
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                              const std::string& source_name = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

// Effective configuration with every default resolved; parse_config of the
// result reproduces the same ExperimentConfig.
std::string emit_config(const ExperimentConfig& config);

DescentConfig descent_config(const ExperimentConfig& config, const std::vector<std::string>& unknown_names);

} // namespace qsid::cli
