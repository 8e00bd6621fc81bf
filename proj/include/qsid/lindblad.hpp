// lindblad.hpp: Model specification, Liouvillian assembly and trace simulation

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qsid/linalg.hpp"

namespace qsid {

// Matrix acting on column-stacked density matrices.
using Superoperator = ComplexMatrix;

// rho -> -i[H, rho] = -i(I (x) H) + i(H^T (x) I).
// Throws std::invalid_argument unless H is square and Hermitian.
Superoperator hamiltonian_superop(const ComplexMatrix& h);

// rho -> L rho L^dag - 1/2 {L^dag L, rho} = conj(L) (x) L - 1/2 I (x) L^dag L - 1/2 (L^dag L)^T (x) I.
Superoperator dissipator_superop(const ComplexMatrix& l);

// Scalar multiplying a term: either a fixed value or the unknown theta[index].
struct Coefficient {
    double value = 1.0;
    std::optional<std::size_t> unknown;

    static Coefficient known(double v) { return {v, std::nullopt}; }
    static Coefficient of_unknown(std::size_t index) { return {0.0, index}; }
    bool is_unknown() const noexcept { return unknown.has_value(); }
};

struct HamiltonianTerm {
    std::string name;
    ComplexMatrix op;  // Hermitian, full space
    Coefficient coefficient = Coefficient::known(1.0);
};

struct DissipatorTerm {
    std::string name;
    ComplexMatrix op;  // coupling operator L, full space
    Coefficient rate = Coefficient::known(0.0);
};

// Known terms plus named unknowns. theta lists the M Hamiltonian unknowns
// first, then the N dissipative rates; every unknown drives exactly one term.
struct ModelSpec {
    HilbertSpace space;
    std::vector<HamiltonianTerm> hamiltonian;
    std::vector<DissipatorTerm> dissipators;
    std::vector<std::string> unknown_names;

    // Throws std::invalid_argument describing the first violated invariant.
    void validate() const;

    std::size_t unknown_count() const noexcept { return unknown_names.size(); }
    std::size_t hamiltonian_unknown_count() const;
    bool is_rate_unknown(std::size_t p) const { return p >= hamiltonian_unknown_count(); }
    std::optional<std::size_t> unknown_index(std::string_view name) const;

    // Same model with theta re-indexed to follow `order` (a permutation of
    // unknown_names that keeps Hamiltonian unknowns ahead of rates).
    ModelSpec with_unknown_order(const std::vector<std::string>& order) const;
};

// Generator for the whole model at parameter vector theta. Negative unknown
// rates are rejected with std::invalid_argument.
Superoperator liouvillian(const ModelSpec& model, std::span<const double> theta);

// The superoperator multiplying theta[p]: -i[H_p, .] or D_{L_p}.
Superoperator unknown_term_superop(const ModelSpec& model, std::size_t p);

// expm(dt * L)
Superoperator propagator(const Superoperator& l, double dt);

// Throws std::invalid_argument for theta of the wrong length or negative rates.
void check_theta(const ModelSpec& model, std::span<const double> theta);

class DensityMatrix {
public:
    static constexpr double kTraceTolerance = 1e-10;
    static constexpr double kHermiticityTolerance = 1e-10;
    static constexpr double kEigenvalueFloor = -1e-8;

    // Validates Hermiticity, unit trace and positivity.
    static DensityMatrix from_matrix(ComplexMatrix m);
    // For states produced by trace-preserving propagation; only shape is checked.
    static DensityMatrix unchecked(ComplexMatrix m);

    const ComplexMatrix& matrix() const noexcept { return m_; }
    Eigen::Index dimension() const noexcept { return m_.rows(); }
    double trace_defect() const;
    double hermiticity_defect() const { return qsid::hermiticity_defect(m_); }
    double purity() const;

private:
    explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}
    ComplexMatrix m_;
};

struct SamplingGrid {
    double dt = 0.01;
    std::size_t samples = 1000;

    void validate() const;
    double time(std::size_t k) const { return static_cast<double>(k) * dt; }
    double duration() const { return static_cast<double>(samples) * dt; }
};

struct ObservableTrace {
    std::string observable_name;
    std::vector<double> values;  // y_k for k = 1..K
};

// Re tr[O rho]; NumericalFailure when |Im tr[O rho]| > 1e-9.
double expectation(const ComplexMatrix& o, const DensityMatrix& rho);
double expectation(const ComplexMatrix& o, const ComplexMatrix& rho);

struct SimulationOptions {
    bool keep_states = true;
    // Largest restricted superoperator dimension handled with a dense propagator.
    std::size_t dense_threshold = 4096;
    std::string observable_name = "O";
};

struct Simulation {
    ObservableTrace trace;
    std::vector<DensityMatrix> states;  // rho(t_k), k = 1..K, when kept
    std::size_t propagated_dimension = 0;
    bool dense = true;
};

// rho(t_k) = M^k rho(0) with one propagator M = expm(dt L). Propagation runs on
// the subspace of vec(rho) reachable from supp(vec rho0), which is exact.
// Throws NumericalFailure (with the step index) if a state loses unit trace or
// Hermiticity beyond DensityMatrix tolerances.
Simulation simulate_trace(const ModelSpec& model, std::span<const double> theta,
                          const DensityMatrix& rho0, const ComplexMatrix& observable,
                          const SamplingGrid& grid, const SimulationOptions& options = {});

} // namespace qsid
