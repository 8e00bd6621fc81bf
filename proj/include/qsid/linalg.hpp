// linalg.hpp: Dense complex operators, tensor embedding and vectorization

#pragma once

#include <complex>
#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qsid {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

// Dimensions of the tensor factors of a truncated Hilbert space, e.g. {2, 8}
// for a qubit times an 8-level oscillator.
class HilbertSpace {
public:
    HilbertSpace() = default;
    explicit HilbertSpace(std::vector<std::size_t> factor_dims);

    const std::vector<std::size_t>& factor_dims() const noexcept { return dims_; }
    std::size_t factor_count() const noexcept { return dims_.size(); }
    std::size_t factor_dim(std::size_t k) const { return dims_.at(k); }
    std::size_t dimension() const noexcept { return total_; }

    bool operator==(const HilbertSpace&) const = default;

private:
    std::vector<std::size_t> dims_;
    std::size_t total_ = 1;
};

enum class Pauli { x, y, z, plus, minus, identity };

// sigma_z = diag(1, -1): basis index 0 is the excited state |e>, index 1 is |g>.
// sigma_minus maps |e> to |g>.
ComplexMatrix pauli(Pauli which);
ComplexMatrix pauli(std::string_view name);

// Truncated bosonic ladder operators; (j, j+1) entry of `annihilation` is sqrt(j+1).
ComplexMatrix annihilation(std::size_t n_levels);
ComplexMatrix creation(std::size_t n_levels);
ComplexMatrix number_operator(std::size_t n_levels);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// I (x) ... (x) op (x) ... (x) I with `op` placed on factor `factor_index`.
ComplexMatrix embed(const ComplexMatrix& op, std::size_t factor_index,
                    const HilbertSpace& space);

// Column stacking: vec(M)[i + j * rows] = M(i, j), so vec(A X B) = (B^T (x) A) vec(X).
ComplexVector vectorize(const ComplexMatrix& m);
ComplexMatrix unvectorize(const ComplexVector& v, std::size_t rows, std::size_t cols);

// max |M - M^dagger|
double hermiticity_defect(const ComplexMatrix& m);
bool is_hermitian(const ComplexMatrix& m, double tol = 1e-12);
bool all_finite(const ComplexMatrix& m);

} // namespace qsid
