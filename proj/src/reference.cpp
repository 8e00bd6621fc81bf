// reference.cpp: Serial full-space objective and forward-recursion gradients

#include "qsid/reference.hpp"

#include "qsid/expm.hpp"

namespace qsid::reference {

namespace {

struct Trajectory {
    ComplexMatrix m;
    std::vector<ComplexVector> states;  // rho_0 .. rho_K, vectorized
    std::vector<double> residual;       // r_1 .. r_K
    ComplexVector weight;
};

Trajectory run(const IdentificationProblem& problem, std::span<const double> theta) {
    problem.validate();
    Trajectory t;
    const Superoperator l = liouvillian(problem.model, theta);
    t.m = propagator(l, problem.grid.dt);
    t.weight = vectorize(problem.observable.transpose());
    t.states.push_back(vectorize(problem.rho0.matrix()));
    for (std::size_t k = 0; k < problem.grid.samples; ++k) {
        t.states.push_back(t.m * t.states.back());
        const double y = (t.weight.transpose() * t.states.back())(0).real();
        t.residual.push_back(y - problem.measured.values[k]);
    }
    return t;
}

std::vector<double> forward_recursion(const Trajectory& t, const std::vector<ComplexMatrix>& dm) {
    std::vector<double> grad;
    for (const auto& d : dm) {
        ComplexVector sigma = ComplexVector::Zero(t.m.rows());
        double g = 0.0;
        for (std::size_t k = 1; k < t.states.size(); ++k) {
            sigma = t.m * sigma + d * t.states[k - 1];
            g += t.residual[k - 1] * (t.weight.transpose() * sigma)(0).real();
        }
        grad.push_back(g);
    }
    return grad;
}

} // namespace

double objective(const IdentificationProblem& problem, std::span<const double> theta) {
    const Trajectory t = run(problem, theta);
    double s = 0.0;
    for (double r : t.residual) s += r * r;
    return 0.5 * s;
}

std::vector<double> gradient_paper(const IdentificationProblem& problem, std::span<const double> theta) {
    const Trajectory t = run(problem, theta);
    std::vector<ComplexMatrix> dm;
    for (std::size_t p = 0; p < theta.size(); ++p)
        dm.push_back(problem.grid.dt * unknown_term_superop(problem.model, p) * t.m);
    return forward_recursion(t, dm);
}

std::vector<double> gradient_exact(const IdentificationProblem& problem, std::span<const double> theta) {
    const Trajectory t = run(problem, theta);
    const double dt = problem.grid.dt;
    const Superoperator l = liouvillian(problem.model, theta);
    std::vector<ComplexMatrix> dm;
    for (std::size_t p = 0; p < theta.size(); ++p)
        dm.push_back(expm_frechet(dt * l, dt * unknown_term_superop(problem.model, p)).second);
    return forward_recursion(t, dm);
}

} // namespace qsid::reference
