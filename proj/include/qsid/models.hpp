// models.hpp: Jaynes-Cummings and ancilla-augmented qubit models, Lorentzian spectra

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qsid/lindblad.hpp"

namespace qsid::models {

// All frequencies and rates are angular, in rad/ns.

enum class JcParameter { nu_q, g_d, gamma_d };

std::string to_string(JcParameter p);
JcParameter jc_parameter_from_string(const std::string& name);

struct JaynesCummingsSpec {
    double nu_q = 6.1814;                     // qubit splitting
    double nu_0 = 6.775;                      // resonator frequency
    double g_d = 0.3142;                      // coupling
    double gamma_d = 0.6283;                  // qubit damping
    double gamma_0 = 2.6 * 2.0 * 3.14159265358979323846 * 1e-3;  // resonator damping
    std::size_t n_levels = 20;
    std::vector<JcParameter> unknowns{JcParameter::nu_q, JcParameter::g_d, JcParameter::gamma_d};

    void validate() const;
};

struct BuiltModel {
    ModelSpec model;
    std::vector<double> theta_truth;
};

// H = (nu_q/2) sigma_z + nu_0 a^dag a + g_d (a^dag sigma_- + a sigma_+),
// dissipators (gamma_d, sigma_-), (gamma_0, a) on [2, n_levels]. Unknowns are
// ordered nu_q, g_d (Hamiltonian) then gamma_d.
BuiltModel build_jc_model(const JaynesCummingsSpec& spec);

// 1/2 (I + sigma_x) on the qubit, vacuum elsewhere.
DensityMatrix qubit_plus_x_state(const HilbertSpace& space);
// sigma_x on factor 0.
ComplexMatrix qubit_sigma_x(const HilbertSpace& space);

// beta = 4 mu^2 / gamma_bar and mu = -sqrt(gamma_bar beta) / 2.
double beta_from_mu(double mu, double gamma_bar);
double mu_from_beta(double beta, double gamma_bar);

struct AncillaSpec {
    double omega = 0.0;       // omega_r^a
    double gamma_bar = 1.0;   // white-noise damping
    std::optional<double> beta;
    std::optional<double> mu;
    std::size_t n_levels = 4;

    void validate() const;
    double resolved_mu() const;
    double resolved_beta() const;
};

struct AugmentedModelSpec {
    double omega_0 = 10.0;
    std::vector<AncillaSpec> ancillas;

    void validate() const;
};

// Unknown names for ancilla r (1-based): omega_r, mu_r, gamma_bar_r.
std::string omega_name(std::size_t r);
std::string mu_name(std::size_t r);
std::string gamma_bar_name(std::size_t r);

// (omega_0/2) sigma_z + sum_r [omega_r a_r^dag a_r + i mu_r (a_r^dag sigma_- - sigma_+ a_r)]
// with dissipators (gamma_bar_r, a_r) on [2, n_1, ..., n_R]. theta order:
// omega_1..omega_R, mu_1..mu_R, gamma_bar_1..gamma_bar_R.
BuiltModel build_augmented_model(const AugmentedModelSpec& spec);

// Inverse of build_augmented_model's theta layout.
std::vector<AncillaSpec> ancillas_from_theta(const AugmentedModelSpec& layout,
                                             const std::vector<double>& theta);

struct LorentzianComponent {
    double beta = 0.0;
    double gamma_bar = 1.0;
    double omega_center = 0.0;
};

struct LorentzianSpectrum {
    std::vector<LorentzianComponent> components;

    static LorentzianSpectrum from_ancillas(const std::vector<AncillaSpec>& ancillas);
};

// S(omega) = sum_r beta_r (gamma_bar_r/2)^2 / ((gamma_bar_r/2)^2 + (omega - omega_r)^2)
double spectrum_eval(const LorentzianSpectrum& spectrum, double omega);

} // namespace qsid::models
