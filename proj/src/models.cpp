// models.cpp: Jaynes-Cummings and ancilla-augmented qubit models

#include "qsid/models.hpp"

#include <cmath>
#include <stdexcept>

namespace qsid::models {

std::string to_string(JcParameter p) {
    switch (p) {
    case JcParameter::nu_q: return "nu_q";
    case JcParameter::g_d: return "g_d";
    case JcParameter::gamma_d: return "gamma_d";
    }
    return "?";
}

JcParameter jc_parameter_from_string(const std::string& name) {
    if (name == "nu_q") return JcParameter::nu_q;
    if (name == "g_d") return JcParameter::g_d;
    if (name == "gamma_d") return JcParameter::gamma_d;
    throw std::invalid_argument("unknown Jaynes-Cummings parameter '" + name +
                                "' (expected nu_q, g_d or gamma_d)");
}

void JaynesCummingsSpec::validate() const {
    for (double v : {nu_q, nu_0, g_d, gamma_d, gamma_0})
        if (!std::isfinite(v)) throw std::invalid_argument("jc: parameters must be finite");
    if (gamma_d < 0.0 || gamma_0 < 0.0) throw std::invalid_argument("jc: rates must be >= 0");
    if (n_levels < 2) throw std::invalid_argument("jc: n_levels must be >= 2");
    for (std::size_t i = 0; i < unknowns.size(); ++i)
        for (std::size_t j = i + 1; j < unknowns.size(); ++j)
            if (unknowns[i] == unknowns[j]) throw std::invalid_argument("jc: duplicate unknown");
}

BuiltModel build_jc_model(const JaynesCummingsSpec& spec) {
    spec.validate();
    const HilbertSpace space({2, spec.n_levels});
    const ComplexMatrix sz = embed(pauli(Pauli::z), 0, space);
    const ComplexMatrix sm = embed(pauli(Pauli::minus), 0, space);
    const ComplexMatrix a = embed(annihilation(spec.n_levels), 1, space);
    const ComplexMatrix coupling = a.adjoint() * sm + a * sm.adjoint();

    auto is_unknown = [&](JcParameter p) {
        for (auto u : spec.unknowns)
            if (u == p) return true;
        return false;
    };

    BuiltModel out;
    ModelSpec& m = out.model;
    m.space = space;
    auto add_unknown = [&](JcParameter p, double truth) {
        m.unknown_names.push_back(to_string(p));
        out.theta_truth.push_back(truth);
        return Coefficient::of_unknown(m.unknown_names.size() - 1);
    };
    // Hamiltonian unknowns first, then the rate.
    const Coefficient c_nu = is_unknown(JcParameter::nu_q) ? add_unknown(JcParameter::nu_q, spec.nu_q)
                                                           : Coefficient::known(spec.nu_q);
    const Coefficient c_g = is_unknown(JcParameter::g_d) ? add_unknown(JcParameter::g_d, spec.g_d)
                                                         : Coefficient::known(spec.g_d);
    const Coefficient c_gamma = is_unknown(JcParameter::gamma_d)
                                    ? add_unknown(JcParameter::gamma_d, spec.gamma_d)
                                    : Coefficient::known(spec.gamma_d);

    m.hamiltonian.push_back({"qubit", 0.5 * sz, c_nu});
    m.hamiltonian.push_back({"resonator", a.adjoint() * a, Coefficient::known(spec.nu_0)});
    m.hamiltonian.push_back({"coupling", coupling, c_g});
    m.dissipators.push_back({"qubit_damping", sm, c_gamma});
    m.dissipators.push_back({"resonator_damping", a, Coefficient::known(spec.gamma_0)});
    m.validate();
    return out;
}

DensityMatrix qubit_plus_x_state(const HilbertSpace& space) {
    if (space.factor_count() == 0 || space.factor_dim(0) != 2)
        throw std::invalid_argument("qubit_plus_x_state: factor 0 must be a qubit");
    ComplexMatrix rho = 0.5 * (pauli(Pauli::identity) + pauli(Pauli::x));
    for (std::size_t k = 1; k < space.factor_count(); ++k) {
        const auto d = static_cast<Eigen::Index>(space.factor_dim(k));
        ComplexMatrix vac = ComplexMatrix::Zero(d, d);
        vac(0, 0) = 1.0;
        rho = kron(rho, vac);
    }
    return DensityMatrix::from_matrix(std::move(rho));
}

ComplexMatrix qubit_sigma_x(const HilbertSpace& space) { return embed(pauli(Pauli::x), 0, space); }

double beta_from_mu(double mu, double gamma_bar) {
    if (!(gamma_bar > 0.0)) throw std::invalid_argument("beta_from_mu: gamma_bar must be > 0");
    return 4.0 * mu * mu / gamma_bar;
}

double mu_from_beta(double beta, double gamma_bar) {
    if (!(gamma_bar > 0.0)) throw std::invalid_argument("mu_from_beta: gamma_bar must be > 0");
    if (beta < 0.0) throw std::invalid_argument("mu_from_beta: beta must be >= 0");
    return -0.5 * std::sqrt(gamma_bar * beta);
}

void AncillaSpec::validate() const {
    if (!std::isfinite(omega)) throw std::invalid_argument("ancilla: omega must be finite");
    if (!(gamma_bar > 0.0)) throw std::invalid_argument("ancilla: gamma_bar must be > 0");
    if (n_levels < 2) throw std::invalid_argument("ancilla: n_levels must be >= 2");
    if (!beta && !mu) throw std::invalid_argument("ancilla: one of beta or mu is required");
    if (beta && *beta < 0.0) throw std::invalid_argument("ancilla: beta must be >= 0");
    if (mu && *mu > 0.0) throw std::invalid_argument("ancilla: mu must be <= 0");
    if (beta && mu) {
        const double implied = mu_from_beta(*beta, gamma_bar);
        if (std::abs(implied - *mu) > 1e-9 * std::max(1.0, std::abs(*mu)))
            throw std::invalid_argument("ancilla: beta and mu are inconsistent");
    }
}

double AncillaSpec::resolved_mu() const {
    validate();
    return mu ? *mu : mu_from_beta(*beta, gamma_bar);
}

double AncillaSpec::resolved_beta() const {
    validate();
    return beta ? *beta : beta_from_mu(*mu, gamma_bar);
}

void AugmentedModelSpec::validate() const {
    if (!std::isfinite(omega_0)) throw std::invalid_argument("augmented: omega_0 must be finite");
    if (ancillas.empty()) throw std::invalid_argument("augmented: at least one ancilla is required");
    for (const auto& a : ancillas) a.validate();
}

std::string omega_name(std::size_t r) { return "omega_" + std::to_string(r); }
std::string mu_name(std::size_t r) { return "mu_" + std::to_string(r); }
std::string gamma_bar_name(std::size_t r) { return "gamma_bar_" + std::to_string(r); }

BuiltModel build_augmented_model(const AugmentedModelSpec& spec) {
    spec.validate();
    const std::size_t rr = spec.ancillas.size();
    std::vector<std::size_t> dims{2};
    for (const auto& a : spec.ancillas) dims.push_back(a.n_levels);
    const HilbertSpace space(dims);

    BuiltModel out;
    ModelSpec& m = out.model;
    m.space = space;
    for (std::size_t r = 1; r <= rr; ++r) m.unknown_names.push_back(omega_name(r));
    for (std::size_t r = 1; r <= rr; ++r) m.unknown_names.push_back(mu_name(r));
    for (std::size_t r = 1; r <= rr; ++r) m.unknown_names.push_back(gamma_bar_name(r));
    out.theta_truth.resize(3 * rr);

    const ComplexMatrix sm = embed(pauli(Pauli::minus), 0, space);
    const ComplexMatrix sp = sm.adjoint();
    m.hamiltonian.push_back({"qubit", 0.5 * embed(pauli(Pauli::z), 0, space),
                             Coefficient::known(spec.omega_0)});
    for (std::size_t r = 0; r < rr; ++r) {
        const auto& anc = spec.ancillas[r];
        const ComplexMatrix a = embed(annihilation(anc.n_levels), r + 1, space);
        m.hamiltonian.push_back({omega_name(r + 1), a.adjoint() * a, Coefficient::of_unknown(r)});
        out.theta_truth[r] = anc.omega;
    }
    for (std::size_t r = 0; r < rr; ++r) {
        const auto& anc = spec.ancillas[r];
        const ComplexMatrix a = embed(annihilation(anc.n_levels), r + 1, space);
        const ComplexMatrix interaction = kI * (a.adjoint() * sm - sp * a);
        m.hamiltonian.push_back({mu_name(r + 1), interaction, Coefficient::of_unknown(rr + r)});
        out.theta_truth[rr + r] = anc.resolved_mu();
    }
    for (std::size_t r = 0; r < rr; ++r) {
        const auto& anc = spec.ancillas[r];
        const ComplexMatrix a = embed(annihilation(anc.n_levels), r + 1, space);
        m.dissipators.push_back({gamma_bar_name(r + 1), a, Coefficient::of_unknown(2 * rr + r)});
        out.theta_truth[2 * rr + r] = anc.gamma_bar;
    }
    m.validate();
    return out;
}

std::vector<AncillaSpec> ancillas_from_theta(const AugmentedModelSpec& layout,
                                             const std::vector<double>& theta) {
    const std::size_t rr = layout.ancillas.size();
    if (theta.size() != 3 * rr)
        throw std::invalid_argument("ancillas_from_theta: theta length does not match 3R");
    std::vector<AncillaSpec> out(rr);
    for (std::size_t r = 0; r < rr; ++r) {
        out[r].omega = theta[r];
        out[r].mu = theta[rr + r];
        out[r].gamma_bar = theta[2 * rr + r];
        out[r].n_levels = layout.ancillas[r].n_levels;
    }
    return out;
}

LorentzianSpectrum LorentzianSpectrum::from_ancillas(const std::vector<AncillaSpec>& ancillas) {
    LorentzianSpectrum s;
    for (const auto& a : ancillas) s.components.push_back({a.resolved_beta(), a.gamma_bar, a.omega});
    return s;
}

double spectrum_eval(const LorentzianSpectrum& spectrum, double omega) {
    double s = 0.0;
    for (const auto& c : spectrum.components) {
        const double hw2 = 0.25 * c.gamma_bar * c.gamma_bar;
        const double dw = omega - c.omega_center;
        s += c.beta * hw2 / (hw2 + dw * dw);
    }
    return s;
}

} // namespace qsid::models
