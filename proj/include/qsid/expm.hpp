// expm.hpp: Matrix exponential, its Frechet derivative, and its action on vectors

#pragma once

#include <cstddef>
#include <functional>
#include <utility>

#include "qsid/linalg.hpp"

namespace qsid {

// exp(M) by scaling and squaring with diagonal Pade approximants of degree
// 3, 5, 7, 9 or 13 (Higham 2005 selection thresholds).
// Throws std::invalid_argument for non-square or non-finite input.
ComplexMatrix expm(const ComplexMatrix& m);

// {exp(A), L(A, E)} where L is the Frechet derivative of exp at A in direction E,
// read off the blocks of exp([[A, E], [0, A]]).
std::pair<ComplexMatrix, ComplexMatrix> expm_frechet(const ComplexMatrix& a, const ComplexMatrix& e);

// A linear map known only through its action. `norm1` must bound the induced
// 1-norm; it drives the choice of scaling and Taylor degree.
struct MatrixFreeOperator {
    Eigen::Index dim = 0;
    std::function<void(const ComplexVector& in, ComplexVector& out)> apply;
    double norm1 = 0.0;
};

struct ExpmActionOptions {
    double tolerance = 0x1p-53;
    std::size_t max_products = 1'000'000;
};

// exp(A) v with the truncated Taylor scheme of Al-Mohy and Higham. Throws
// NumericalFailure when the product budget would be exceeded or the result
// stops being finite.
ComplexVector expm_action(const ComplexMatrix& a, const ComplexVector& v,
                          const ExpmActionOptions& options = {});
ComplexVector expm_action(const MatrixFreeOperator& a, const ComplexVector& v,
                          const ExpmActionOptions& options = {});

// Induced 1-norm (max column sum).
double norm1(const ComplexMatrix& m);

} // namespace qsid
