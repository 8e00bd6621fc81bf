// terms.cpp: Structured Liouvillian terms

#include "qsid/terms.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace qsid {

Subspace::Subspace(std::vector<std::size_t> indices, std::size_t full_size)
    : indices_(std::move(indices)), full_size_(full_size), position_(full_size, -1) {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
    for (std::size_t r = 0; r < indices_.size(); ++r) {
        if (indices_[r] >= full_size) throw std::invalid_argument("Subspace: index out of range");
        position_[indices_[r]] = static_cast<std::ptrdiff_t>(r);
    }
}

Subspace Subspace::full(std::size_t full_size) {
    std::vector<std::size_t> all(full_size);
    for (std::size_t i = 0; i < full_size; ++i) all[i] = i;
    return Subspace(std::move(all), full_size);
}

ComplexVector Subspace::restrict(const ComplexVector& full) const {
    ComplexVector out(static_cast<Eigen::Index>(indices_.size()));
    for (std::size_t r = 0; r < indices_.size(); ++r)
        out(static_cast<Eigen::Index>(r)) = full(static_cast<Eigen::Index>(indices_[r]));
    return out;
}

ComplexVector Subspace::expand(const ComplexVector& reduced) const {
    ComplexVector out = ComplexVector::Zero(static_cast<Eigen::Index>(full_size_));
    for (std::size_t r = 0; r < indices_.size(); ++r)
        out(static_cast<Eigen::Index>(indices_[r])) = reduced(static_cast<Eigen::Index>(r));
    return out;
}

namespace {

void sparsify(const ComplexMatrix& m, std::vector<std::vector<std::pair<std::size_t, Complex>>>& cols,
              std::vector<std::vector<std::pair<std::size_t, Complex>>>& rows) {
    const auto d = static_cast<std::size_t>(m.rows());
    cols.assign(d, {});
    rows.assign(d, {});
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i) {
            const Complex v = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (v != Complex{}) {
                cols[j].push_back({i, v});
                rows[i].push_back({j, v});
            }
        }
}

double norm_inf(const ComplexMatrix& m) {
    return m.size() ? m.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
}

} // namespace

TermAction TermAction::hamiltonian(const ComplexMatrix& h) {
    if (h.rows() != h.cols()) throw std::invalid_argument("TermAction: operator must be square");
    TermAction t;
    t.dim_ = static_cast<std::size_t>(h.rows());
    t.op_ = h;
    std::vector<std::vector<std::pair<std::size_t, Complex>>> cols, rows;
    sparsify(h, cols, rows);
    t.col_.resize(t.dim_);
    t.row_.resize(t.dim_);
    for (std::size_t i = 0; i < t.dim_; ++i) {
        for (auto [k, v] : cols[i]) t.col_[i].push_back({k, v});
        for (auto [k, v] : rows[i]) t.row_[i].push_back({k, v});
    }
    // |vec(A X B)| <= ||A||_1 ||B||_inf in the induced 1-norm
    t.norm1_bound_ = norm1(h) + norm_inf(h);
    return t;
}

TermAction TermAction::dissipator(const ComplexMatrix& l) {
    if (l.rows() != l.cols()) throw std::invalid_argument("TermAction: operator must be square");
    TermAction t;
    t.is_dissipator_ = true;
    t.dim_ = static_cast<std::size_t>(l.rows());
    t.op_ = l;
    t.op_sq_ = l.adjoint() * l;
    std::vector<std::vector<std::pair<std::size_t, Complex>>> cols, rows;
    sparsify(l, cols, rows);
    t.col_.resize(t.dim_);
    t.row_.resize(t.dim_);
    for (std::size_t i = 0; i < t.dim_; ++i) {
        for (auto [k, v] : cols[i]) t.col_[i].push_back({k, v});
        for (auto [k, v] : rows[i]) t.row_[i].push_back({k, v});
    }
    sparsify(t.op_sq_, cols, rows);
    t.sq_col_.resize(t.dim_);
    t.sq_row_.resize(t.dim_);
    for (std::size_t i = 0; i < t.dim_; ++i) {
        for (auto [k, v] : cols[i]) t.sq_col_[i].push_back({k, v});
        for (auto [k, v] : rows[i]) t.sq_row_[i].push_back({k, v});
    }
    t.norm1_bound_ = norm1(l) * norm1(l) + 0.5 * (norm1(t.op_sq_) + norm_inf(t.op_sq_));
    return t;
}

ComplexMatrix TermAction::restricted(const Subspace& basis) const {
    const auto n = static_cast<Eigen::Index>(basis.size());
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        const std::size_t full = basis.indices()[static_cast<std::size_t>(c)];
        const std::size_t i = full % dim_, j = full / dim_;
        image(i, j, [&](std::size_t row, Complex v) {
            const std::ptrdiff_t r = basis.position(row);
            if (r < 0) throw std::logic_error("TermAction::restricted: basis is not invariant");
            out(r, c) += v;
        });
    }
    return out;
}

void TermAction::apply(const ComplexMatrix& rho, ComplexMatrix& out) const {
    if (!is_dissipator_) {
        out.noalias() += -kI * (op_ * rho);
        out.noalias() += kI * (rho * op_);
        return;
    }
    out.noalias() += op_ * rho * op_.adjoint();
    out.noalias() -= 0.5 * (op_sq_ * rho);
    out.noalias() -= 0.5 * (rho * op_sq_);
}

LiouvillianTerms::LiouvillianTerms(const ModelSpec& model) : dim_(model.space.dimension()) {
    model.validate();
    unknown_.resize(model.unknown_count());
    for (const auto& t : model.hamiltonian) {
        auto action = TermAction::hamiltonian(t.op);
        if (t.coefficient.unknown) {
            unknown_[*t.coefficient.unknown] = std::move(action);
        } else if (t.coefficient.value != 0.0) {
            known_.push_back({std::move(action), t.coefficient.value});
        }
    }
    for (const auto& t : model.dissipators) {
        auto action = TermAction::dissipator(t.op);
        if (t.rate.unknown) {
            unknown_[*t.rate.unknown] = std::move(action);
        } else if (t.rate.value != 0.0) {
            known_.push_back({std::move(action), t.rate.value});
        }
    }
    build_graph();
}

void LiouvillianTerms::build_graph() {
    const std::size_t n = dim_ * dim_;
    successors_.assign(n, {});
    std::vector<std::size_t> scratch;
    for (std::size_t c = 0; c < n; ++c) {
        scratch.clear();
        auto emit = [&](std::size_t row, Complex) { scratch.push_back(row); };
        const std::size_t i = c % dim_, j = c / dim_;
        for (const auto& w : known_) w.action.image(i, j, emit);
        for (const auto& u : unknown_) u.image(i, j, emit);
        std::sort(scratch.begin(), scratch.end());
        scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
        successors_[c] = scratch;
    }
}

std::vector<std::size_t> LiouvillianTerms::reachable(std::span<const std::size_t> seeds) const {
    std::vector<bool> seen(successors_.size(), false);
    std::deque<std::size_t> queue;
    for (std::size_t s : seeds)
        if (!seen[s]) {
            seen[s] = true;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        const std::size_t c = queue.front();
        queue.pop_front();
        for (std::size_t r : successors_[c])
            if (!seen[r]) {
                seen[r] = true;
                queue.push_back(r);
            }
    }
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < seen.size(); ++c)
        if (seen[c]) out.push_back(c);
    return out;
}

std::vector<std::size_t> LiouvillianTerms::coreachable(std::span<const std::size_t> seeds) const {
    std::vector<std::vector<std::size_t>> predecessors(successors_.size());
    for (std::size_t c = 0; c < successors_.size(); ++c)
        for (std::size_t r : successors_[c]) predecessors[r].push_back(c);
    std::vector<bool> seen(successors_.size(), false);
    std::deque<std::size_t> queue;
    for (std::size_t s : seeds)
        if (!seen[s]) {
            seen[s] = true;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        const std::size_t c = queue.front();
        queue.pop_front();
        for (std::size_t r : predecessors[c])
            if (!seen[r]) {
                seen[r] = true;
                queue.push_back(r);
            }
    }
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < seen.size(); ++c)
        if (seen[c]) out.push_back(c);
    return out;
}

ComplexMatrix LiouvillianTerms::known_restricted(const Subspace& basis) const {
    const auto n = static_cast<Eigen::Index>(basis.size());
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    for (const auto& w : known_) out += w.coefficient * w.action.restricted(basis);
    return out;
}

ComplexMatrix LiouvillianTerms::unknown_restricted(std::size_t p, const Subspace& basis) const {
    return unknown_.at(p).restricted(basis);
}

void LiouvillianTerms::apply(std::span<const double> theta, const ComplexMatrix& rho,
                             ComplexMatrix& out) const {
    out.setZero(rho.rows(), rho.cols());
    ComplexMatrix part(rho.rows(), rho.cols());
    for (const auto& w : known_) {
        part.setZero();
        w.action.apply(rho, part);
        out += w.coefficient * part;
    }
    for (std::size_t p = 0; p < unknown_.size(); ++p) {
        if (theta[p] == 0.0) continue;
        part.setZero();
        unknown_[p].apply(rho, part);
        out += theta[p] * part;
    }
}

void LiouvillianTerms::apply_unknown(std::size_t p, const ComplexMatrix& rho, ComplexMatrix& out) const {
    out.setZero(rho.rows(), rho.cols());
    unknown_.at(p).apply(rho, out);
}

MatrixFreeOperator LiouvillianTerms::matrix_free(std::span<const double> theta, double scale) const {
    std::vector<double> coeffs(theta.begin(), theta.end());
    double bound = 0.0;
    for (const auto& w : known_) bound += std::abs(w.coefficient) * w.action.norm1_bound();
    for (std::size_t p = 0; p < unknown_.size(); ++p)
        bound += std::abs(coeffs[p]) * unknown_[p].norm1_bound();
    MatrixFreeOperator op;
    op.dim = static_cast<Eigen::Index>(dim_ * dim_);
    op.norm1 = std::abs(scale) * bound;
    const auto d = static_cast<Eigen::Index>(dim_);
    op.apply = [this, coeffs, scale, d](const ComplexVector& in, ComplexVector& out) {
        const Eigen::Map<const ComplexMatrix> rho(in.data(), d, d);
        ComplexMatrix result;
        apply(coeffs, rho, result);
        out = scale * Eigen::Map<const ComplexVector>(result.data(), result.size());
    };
    return op;
}

std::vector<std::size_t> support(const ComplexVector& v) {
    std::vector<std::size_t> out;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v(i) != Complex{}) out.push_back(static_cast<std::size_t>(i));
    return out;
}

} // namespace qsid
