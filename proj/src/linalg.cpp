// linalg.cpp: Dense complex operators, tensor embedding and vectorization

#include "qsid/linalg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qsid {

HilbertSpace::HilbertSpace(std::vector<std::size_t> factor_dims) : dims_(std::move(factor_dims)) {
    if (dims_.empty()) throw std::invalid_argument("HilbertSpace: no tensor factors");
    for (std::size_t d : dims_) {
        if (d == 0) throw std::invalid_argument("HilbertSpace: factor dimension must be >= 1");
        total_ *= d;
    }
}

ComplexMatrix pauli(Pauli which) {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    switch (which) {
    case Pauli::x: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case Pauli::y: m(0, 1) = -kI; m(1, 0) = kI; break;
    case Pauli::z: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    case Pauli::plus: m(0, 1) = 1.0; break;
    case Pauli::minus: m(1, 0) = 1.0; break;
    case Pauli::identity: m(0, 0) = 1.0; m(1, 1) = 1.0; break;
    }
    return m;
}

ComplexMatrix pauli(std::string_view name) {
    if (name == "x") return pauli(Pauli::x);
    if (name == "y") return pauli(Pauli::y);
    if (name == "z") return pauli(Pauli::z);
    if (name == "plus") return pauli(Pauli::plus);
    if (name == "minus") return pauli(Pauli::minus);
    if (name == "identity") return pauli(Pauli::identity);
    throw std::invalid_argument("pauli: unknown name '" + std::string(name) + "'");
}

ComplexMatrix annihilation(std::size_t n_levels) {
    if (n_levels < 2) throw std::invalid_argument("annihilation: n_levels must be >= 2");
    ComplexMatrix a = ComplexMatrix::Zero(n_levels, n_levels);
    for (std::size_t j = 0; j + 1 < n_levels; ++j)
        a(j, j + 1) = std::sqrt(static_cast<double>(j + 1));
    return a;
}

ComplexMatrix creation(std::size_t n_levels) { return annihilation(n_levels).adjoint(); }

ComplexMatrix number_operator(std::size_t n_levels) {
    if (n_levels < 2) throw std::invalid_argument("number_operator: n_levels must be >= 2");
    ComplexMatrix n = ComplexMatrix::Zero(n_levels, n_levels);
    for (std::size_t j = 0; j < n_levels; ++j) n(j, j) = static_cast<double>(j);
    return n;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    const Eigen::Index br = b.rows(), bc = b.cols();
    ComplexMatrix out(a.rows() * br, a.cols() * bc);
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.block(i * br, j * bc, br, bc) = a(i, j) * b;
    return out;
}

ComplexMatrix embed(const ComplexMatrix& op, std::size_t factor_index, const HilbertSpace& space) {
    if (factor_index >= space.factor_count())
        throw std::invalid_argument("embed: factor index out of range");
    const auto d = static_cast<Eigen::Index>(space.factor_dim(factor_index));
    if (op.rows() != d || op.cols() != d)
        throw std::invalid_argument("embed: operator dimension does not match factor " +
                                    std::to_string(factor_index));
    std::size_t left = 1, right = 1;
    for (std::size_t k = 0; k < factor_index; ++k) left *= space.factor_dim(k);
    for (std::size_t k = factor_index + 1; k < space.factor_count(); ++k) right *= space.factor_dim(k);
    const auto l = static_cast<Eigen::Index>(left), r = static_cast<Eigen::Index>(right);
    return kron(kron(ComplexMatrix::Identity(l, l), op), ComplexMatrix::Identity(r, r));
}

ComplexVector vectorize(const ComplexMatrix& m) {
    // Eigen storage is column-major, so a flat copy is column stacking.
    return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

ComplexMatrix unvectorize(const ComplexVector& v, std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0 || static_cast<std::size_t>(v.size()) != rows * cols)
        throw std::invalid_argument("unvectorize: vector length does not equal rows * cols");
    return Eigen::Map<const ComplexMatrix>(v.data(), static_cast<Eigen::Index>(rows),
                                           static_cast<Eigen::Index>(cols));
}

double hermiticity_defect(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& m, double tol) { return hermiticity_defect(m) <= tol; }

bool all_finite(const ComplexMatrix& m) { return m.allFinite(); }

} // namespace qsid
