// terms.hpp: Structured Liouvillian terms: restriction to invariant subspaces
// and matrix-free action

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qsid/expm.hpp"
#include "qsid/lindblad.hpp"

namespace qsid {

// Sorted set of column-stacked indices of vec(rho), with the inverse lookup.
class Subspace {
public:
    Subspace() = default;
    Subspace(std::vector<std::size_t> indices, std::size_t full_size);
    static Subspace full(std::size_t full_size);

    const std::vector<std::size_t>& indices() const noexcept { return indices_; }
    std::size_t size() const noexcept { return indices_.size(); }
    std::size_t full_size() const noexcept { return full_size_; }
    // -1 when the full index is outside the subspace.
    std::ptrdiff_t position(std::size_t full_index) const { return position_[full_index]; }

    ComplexVector restrict(const ComplexVector& full) const;
    ComplexVector expand(const ComplexVector& reduced) const;

private:
    std::vector<std::size_t> indices_;
    std::size_t full_size_ = 0;
    std::vector<std::ptrdiff_t> position_;
};

// One term -i[H, .] or D_L described through its operator's nonzeros.
class TermAction {
public:
    static TermAction hamiltonian(const ComplexMatrix& h);
    static TermAction dissipator(const ComplexMatrix& l);

    std::size_t dim() const noexcept { return dim_; }

    // Calls emit(vec_index, value) for the nonzeros of term(E_ij), where E_ij
    // is the basis matrix |i><j|. Indices may repeat; values add.
    template <typename Emit>
    void image(std::size_t i, std::size_t j, Emit&& emit) const;

    // Dense block of the superoperator on `basis`. The caller guarantees the
    // basis is invariant (images of basis vectors stay inside it).
    ComplexMatrix restricted(const Subspace& basis) const;

    // out += term(rho)
    void apply(const ComplexMatrix& rho, ComplexMatrix& out) const;

    // Bound on the induced 1-norm of the superoperator.
    double norm1_bound() const noexcept { return norm1_bound_; }

private:
    struct Entry {
        std::size_t index;
        Complex value;
    };
    using Sparse = std::vector<std::vector<Entry>>;

    bool is_dissipator_ = false;
    std::size_t dim_ = 0;
    ComplexMatrix op_;       // H or L
    ComplexMatrix op_sq_;    // L^dag L (dissipators only)
    Sparse col_;             // col_[i]: (k, op(k, i))
    Sparse row_;             // row_[j]: (k, op(j, k))
    Sparse sq_col_, sq_row_; // same for L^dag L
    double norm1_bound_ = 0.0;
};

// All terms of a model, split into fixed and unknown-driven parts, with the
// reachability structure of their union.
class LiouvillianTerms {
public:
    explicit LiouvillianTerms(const ModelSpec& model);

    std::size_t hilbert_dim() const noexcept { return dim_; }
    std::size_t unknown_count() const noexcept { return unknown_.size(); }

    // Forward closure of `seeds` under the union sparsity graph.
    std::vector<std::size_t> reachable(std::span<const std::size_t> seeds) const;
    // Indices from which some seed can be reached.
    std::vector<std::size_t> coreachable(std::span<const std::size_t> seeds) const;

    ComplexMatrix known_restricted(const Subspace& basis) const;
    ComplexMatrix unknown_restricted(std::size_t p, const Subspace& basis) const;

    // out = L(theta) rho, computed on the d x d matrix.
    void apply(std::span<const double> theta, const ComplexMatrix& rho, ComplexMatrix& out) const;
    void apply_unknown(std::size_t p, const ComplexMatrix& rho, ComplexMatrix& out) const;
    MatrixFreeOperator matrix_free(std::span<const double> theta, double scale) const;

private:
    struct Weighted {
        TermAction action;
        double coefficient;
    };
    std::size_t dim_ = 0;
    std::vector<Weighted> known_;
    std::vector<TermAction> unknown_;
    std::vector<std::vector<std::size_t>> successors_;

    void build_graph();
};

// Indices where |v_i| > 0.
std::vector<std::size_t> support(const ComplexVector& v);

template <typename Emit>
void TermAction::image(std::size_t i, std::size_t j, Emit&& emit) const {
    const std::size_t d = dim_;
    if (!is_dissipator_) {
        // -i (H E_ij - E_ij H)
        for (const auto& [k, h] : col_[i]) emit(k + j * d, -kI * h);
        for (const auto& [k, h] : row_[j]) emit(i + k * d, kI * h);
        return;
    }
    // L E_ij L^dag = sum_kl L_ki conj(L_lj) E_kl
    for (const auto& [k, lk] : col_[i])
        for (const auto& [l, ll] : col_[j]) emit(k + l * d, lk * std::conj(ll));
    for (const auto& [k, a] : sq_col_[i]) emit(k + j * d, -0.5 * a);
    for (const auto& [k, a] : sq_row_[j]) emit(i + k * d, -0.5 * a);
}

} // namespace qsid
