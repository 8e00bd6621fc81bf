// reference.hpp: Serial full-space implementation of the objective and
// gradients, kept as the cross-check for ObjectiveKernel

#pragma once

#include <span>
#include <vector>

#include "qsid/ident.hpp"

namespace qsid::reference {

// Propagates the full d^2 vector with the dense superoperator.
double objective(const IdentificationProblem& problem, std::span<const double> theta);

// For each p: sigma_0 = 0, sigma_k = M sigma_{k-1} + (dM/dtheta_p) rho_{k-1},
// dJ/dtheta_p = sum_k (y_k - yhat_k) Re tr[O sigma_k].
std::vector<double> gradient_paper(const IdentificationProblem& problem, std::span<const double> theta);
std::vector<double> gradient_exact(const IdentificationProblem& problem, std::span<const double> theta);

} // namespace qsid::reference
