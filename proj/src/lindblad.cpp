// lindblad.cpp: Model specification, Liouvillian assembly and trace simulation

#include "qsid/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "qsid/errors.hpp"
#include "qsid/expm.hpp"
#include "qsid/terms.hpp"

namespace qsid {

namespace {

double hermiticity_tolerance(const ComplexMatrix& m) {
    const double scale = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
    return 1e-12 * std::max(1.0, scale);
}

void require_square(const ComplexMatrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw std::invalid_argument(std::string(what) + ": operator must be square and non-empty");
}

} // namespace

Superoperator hamiltonian_superop(const ComplexMatrix& h) {
    require_square(h, "hamiltonian_superop");
    if (hermiticity_defect(h) > hermiticity_tolerance(h))
        throw std::invalid_argument("hamiltonian_superop: H is not Hermitian");
    const Eigen::Index d = h.rows();
    const ComplexMatrix ident = ComplexMatrix::Identity(d, d);
    return -kI * kron(ident, h) + kI * kron(h.transpose(), ident);
}

Superoperator dissipator_superop(const ComplexMatrix& l) {
    require_square(l, "dissipator_superop");
    const Eigen::Index d = l.rows();
    const ComplexMatrix ident = ComplexMatrix::Identity(d, d);
    const ComplexMatrix ldl = l.adjoint() * l;
    return kron(l.conjugate(), l) - 0.5 * kron(ident, ldl) - 0.5 * kron(ldl.transpose(), ident);
}

std::size_t ModelSpec::hamiltonian_unknown_count() const {
    return static_cast<std::size_t>(std::count_if(
        hamiltonian.begin(), hamiltonian.end(),
        [](const HamiltonianTerm& t) { return t.coefficient.is_unknown(); }));
}

void ModelSpec::validate() const {
    const auto d = static_cast<Eigen::Index>(space.dimension());
    if (space.factor_count() == 0) throw std::invalid_argument("model: empty Hilbert space");
    const std::size_t p_total = unknown_names.size();
    std::vector<int> used(p_total, 0);
    std::set<std::string> names(unknown_names.begin(), unknown_names.end());
    if (names.size() != p_total) throw std::invalid_argument("model: duplicate unknown names");
    const std::size_t m = hamiltonian_unknown_count();

    for (const auto& t : hamiltonian) {
        if (t.op.rows() != d || t.op.cols() != d)
            throw std::invalid_argument("model: Hamiltonian term '" + t.name + "' has wrong dimension");
        if (hermiticity_defect(t.op) > hermiticity_tolerance(t.op))
            throw std::invalid_argument("model: Hamiltonian term '" + t.name + "' is not Hermitian");
        if (t.coefficient.unknown) {
            const std::size_t p = *t.coefficient.unknown;
            if (p >= m)
                throw std::invalid_argument("model: Hamiltonian unknown '" + t.name +
                                            "' must precede dissipative unknowns in theta");
            ++used[p];
        }
    }
    for (const auto& t : dissipators) {
        if (t.op.rows() != d || t.op.cols() != d)
            throw std::invalid_argument("model: dissipator '" + t.name + "' has wrong dimension");
        if (t.rate.unknown) {
            const std::size_t p = *t.rate.unknown;
            if (p < m || p >= p_total)
                throw std::invalid_argument("model: dissipative unknown '" + t.name +
                                            "' has an out-of-order theta index");
            ++used[p];
        } else if (t.rate.value < 0.0) {
            throw std::invalid_argument("model: dissipator '" + t.name + "' has a negative rate");
        }
    }
    for (std::size_t p = 0; p < p_total; ++p)
        if (used[p] != 1)
            throw std::invalid_argument("model: unknown '" + unknown_names[p] +
                                        "' must drive exactly one term");
}

std::optional<std::size_t> ModelSpec::unknown_index(std::string_view name) const {
    for (std::size_t p = 0; p < unknown_names.size(); ++p)
        if (unknown_names[p] == name) return p;
    return std::nullopt;
}

ModelSpec ModelSpec::with_unknown_order(const std::vector<std::string>& order) const {
    if (order.size() != unknown_names.size())
        throw std::invalid_argument("with_unknown_order: order is not a permutation of the unknowns");
    std::vector<std::size_t> new_index(unknown_names.size());
    std::vector<bool> seen(unknown_names.size(), false);
    for (std::size_t q = 0; q < order.size(); ++q) {
        const auto p = unknown_index(order[q]);
        if (!p || seen[*p])
            throw std::invalid_argument("with_unknown_order: order is not a permutation of the unknowns");
        seen[*p] = true;
        new_index[*p] = q;
    }
    ModelSpec out = *this;
    out.unknown_names = order;
    for (auto& t : out.hamiltonian)
        if (t.coefficient.unknown) t.coefficient.unknown = new_index[*t.coefficient.unknown];
    for (auto& t : out.dissipators)
        if (t.rate.unknown) t.rate.unknown = new_index[*t.rate.unknown];
    out.validate();
    return out;
}

void check_theta(const ModelSpec& model, std::span<const double> theta) {
    if (theta.size() != model.unknown_count())
        throw std::invalid_argument("theta has " + std::to_string(theta.size()) +
                                    " entries, model has " + std::to_string(model.unknown_count()) +
                                    " unknowns");
    for (std::size_t p = 0; p < theta.size(); ++p) {
        if (!std::isfinite(theta[p]))
            throw std::invalid_argument("theta['" + model.unknown_names[p] + "'] is not finite");
        if (model.is_rate_unknown(p) && theta[p] < 0.0)
            throw std::invalid_argument("negative rate for unknown '" + model.unknown_names[p] + "'");
    }
}

Superoperator liouvillian(const ModelSpec& model, std::span<const double> theta) {
    model.validate();
    check_theta(model, theta);
    const auto n = static_cast<Eigen::Index>(model.space.dimension() * model.space.dimension());
    Superoperator l = Superoperator::Zero(n, n);
    for (const auto& t : model.hamiltonian) {
        const double c = t.coefficient.unknown ? theta[*t.coefficient.unknown] : t.coefficient.value;
        l += c * hamiltonian_superop(t.op);
    }
    for (const auto& t : model.dissipators) {
        const double c = t.rate.unknown ? theta[*t.rate.unknown] : t.rate.value;
        l += c * dissipator_superop(t.op);
    }
    return l;
}

Superoperator unknown_term_superop(const ModelSpec& model, std::size_t p) {
    for (const auto& t : model.hamiltonian)
        if (t.coefficient.unknown == p) return hamiltonian_superop(t.op);
    for (const auto& t : model.dissipators)
        if (t.rate.unknown == p) return dissipator_superop(t.op);
    throw std::invalid_argument("unknown_term_superop: no term for theta index " + std::to_string(p));
}

Superoperator propagator(const Superoperator& l, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("propagator: dt must be positive");
    return expm(dt * l);
}

DensityMatrix DensityMatrix::from_matrix(ComplexMatrix m) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw std::invalid_argument("DensityMatrix: matrix must be square and non-empty");
    if (!m.allFinite()) throw std::invalid_argument("DensityMatrix: non-finite entries");
    if (qsid::hermiticity_defect(m) > kHermiticityTolerance)
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    if (std::abs(m.trace() - Complex{1.0}) > kTraceTolerance)
        throw std::invalid_argument("DensityMatrix: trace is not 1");
    const ComplexMatrix herm = 0.5 * (m + m.adjoint());
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(herm, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < kEigenvalueFloor)
        throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::unchecked(ComplexMatrix m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("DensityMatrix: matrix must be square");
    return DensityMatrix(std::move(m));
}

double DensityMatrix::trace_defect() const { return std::abs(m_.trace() - Complex{1.0}); }

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

void SamplingGrid::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("grid: dt must be positive");
    if (samples < 1) throw std::invalid_argument("grid: K must be >= 1");
}

double expectation(const ComplexMatrix& o, const ComplexMatrix& rho) {
    if (o.rows() != rho.rows() || o.cols() != rho.cols() || o.rows() != o.cols())
        throw std::invalid_argument("expectation: dimension mismatch");
    const Complex value = (o.transpose().cwiseProduct(rho)).sum();  // tr[O rho]
    if (std::abs(value.imag()) > 1e-9)
        throw NumericalFailure("expectation: imaginary part " + std::to_string(value.imag()) +
                               " exceeds 1e-9");
    return value.real();
}

double expectation(const ComplexMatrix& o, const DensityMatrix& rho) {
    return expectation(o, rho.matrix());
}

Simulation simulate_trace(const ModelSpec& model, std::span<const double> theta,
                          const DensityMatrix& rho0, const ComplexMatrix& observable,
                          const SamplingGrid& grid, const SimulationOptions& options) {
    model.validate();
    check_theta(model, theta);
    grid.validate();
    const auto d = static_cast<Eigen::Index>(model.space.dimension());
    if (rho0.dimension() != d) throw std::invalid_argument("simulate_trace: rho0 has wrong dimension");
    if (observable.rows() != d || observable.cols() != d)
        throw std::invalid_argument("simulate_trace: observable has wrong dimension");
    if (hermiticity_defect(observable) > hermiticity_tolerance(observable))
        throw std::invalid_argument("simulate_trace: observable is not Hermitian");

    const LiouvillianTerms terms(model);
    const ComplexVector x0 = vectorize(rho0.matrix());
    const auto seeds = support(x0);
    const Subspace basis(terms.reachable(seeds), static_cast<std::size_t>(d * d));

    Simulation sim;
    sim.trace.observable_name = options.observable_name;
    sim.trace.values.reserve(grid.samples);
    if (options.keep_states) sim.states.reserve(grid.samples);
    sim.propagated_dimension = basis.size();
    sim.dense = basis.size() <= options.dense_threshold;

    auto record = [&](const ComplexVector& full, std::size_t k) {
        ComplexMatrix rho = unvectorize(full, d, d);
        const double trace_defect = std::abs(rho.trace() - Complex{1.0});
        const double herm_defect = hermiticity_defect(rho);
        if (!(trace_defect <= DensityMatrix::kTraceTolerance) ||
            !(herm_defect <= DensityMatrix::kHermiticityTolerance))
            throw NumericalFailure("simulate_trace: state at step " + std::to_string(k) +
                                       " violates trace/Hermiticity tolerance (trace defect " +
                                       std::to_string(trace_defect) + ", Hermiticity defect " +
                                       std::to_string(herm_defect) + ")",
                                   k);
        sim.trace.values.push_back(expectation(observable, rho));
        if (options.keep_states) sim.states.push_back(DensityMatrix::unchecked(std::move(rho)));
    };

    if (sim.dense) {
        ComplexMatrix l = terms.known_restricted(basis);
        for (std::size_t p = 0; p < theta.size(); ++p)
            l += theta[p] * terms.unknown_restricted(p, basis);
        const ComplexMatrix m = propagator(l, grid.dt);
        ComplexVector x = basis.restrict(x0);
        ComplexVector next(x.size());
        for (std::size_t k = 1; k <= grid.samples; ++k) {
            next.noalias() = m * x;
            x.swap(next);
            record(basis.expand(x), k);
        }
    } else {
        const MatrixFreeOperator op = terms.matrix_free(theta, grid.dt);
        ComplexVector x = x0;
        for (std::size_t k = 1; k <= grid.samples; ++k) {
            x = expm_action(op, x);
            record(x, k);
        }
    }
    return sim;
}

} // namespace qsid
