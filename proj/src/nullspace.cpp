#include "stk/nullspace.hpp"

#include "stk/errors.hpp"

#include "checked_svd.hpp"

#include <algorithm>
#include <limits>
#include <optional>

namespace stk {

namespace {

using SparseColMatrix = Eigen::SparseMatrix<double>;

// True when every row has at most one nonzero.
bool is_selection(const SparseRowMatrix& a) {
    for (Index i = 0; i < a.outerSize(); ++i) {
        int count = 0;
        for (SparseRowMatrix::InnerIterator it(a, i); it; ++it) {
            if (it.value() != 0.0 && ++count > 1) return false;
        }
    }
    return true;
}

// Canonical columns for every column not hit by a selection row.
SparseColMatrix selection_nullspace(const SparseRowMatrix& a) {
    std::vector<bool> hit(static_cast<std::size_t>(a.cols()), false);
    for (Index i = 0; i < a.outerSize(); ++i) {
        for (SparseRowMatrix::InnerIterator it(a, i); it; ++it) {
            if (it.value() != 0.0) hit[static_cast<std::size_t>(it.col())] = true;
        }
    }
    std::vector<Eigen::Triplet<double>> trip;
    Index col = 0;
    for (Index k = 0; k < a.cols(); ++k) {
        if (!hit[static_cast<std::size_t>(k)]) trip.emplace_back(k, col++, 1.0);
    }
    SparseColMatrix v(a.cols(), col);
    v.setFromTriplets(trip.begin(), trip.end());
    return v;
}

}  // namespace

double rank_cutoff(double sigma_max, Index rows, Index cols, const NumericOptions& opts) {
    return opts.rank_tolerance_scale * static_cast<double>(std::max(rows, cols)) *
           std::numeric_limits<double>::epsilon() * sigma_max;
}

Eigen::MatrixXd dense_nullspace(const Eigen::MatrixXd& a, const NumericOptions& opts) {
    const Index n = a.cols();
    if (a.rows() == 0 || n == 0) return Eigen::MatrixXd::Identity(n, n);
    const detail::CheckedSvd svd(a, true);
    const double cut = rank_cutoff(svd.s.size() > 0 ? svd.s[0] : 0.0, a.rows(), n, opts);
    Index rank = 0;
    while (rank < svd.s.size() && svd.s[rank] > cut) ++rank;
    return svd.v.rightCols(n - rank);
}

Eigen::MatrixXd nullspace(const SparseRowMatrix& a, const NumericOptions& opts) {
    if (is_selection(a)) return Eigen::MatrixXd(selection_nullspace(a));
    if (static_cast<std::size_t>(a.cols()) > opts.dense_threshold) {
        throw DomainError("nullspace of a " + std::to_string(a.cols()) +
                          "-column matrix needs densification above the threshold " +
                          std::to_string(opts.dense_threshold) + "; use the recursive route");
    }
    return dense_nullspace(Eigen::MatrixXd(a), opts);
}

Eigen::MatrixXd recursive_nullspace(const std::vector<ConstraintBlock>& blocks, const NumericOptions& opts) {
    if (blocks.empty()) {
        throw DomainError("recursive nullspace needs at least one block");
    }
    // While every block so far selects entries, the basis stays a sparse set of canonical columns.
    std::optional<SparseColMatrix> sparse_basis;
    Eigen::MatrixXd dense_basis;
    bool dense = false;

    for (std::size_t s = 0; s < blocks.size(); ++s) {
        const ConstraintBlock& block = blocks[s];
        if (!dense) {
            const SparseRowMatrix a = block.to_sparse();
            const SparseRowMatrix av = sparse_basis ? SparseRowMatrix(a * SparseRowMatrix(*sparse_basis)) : a;
            if (is_selection(av)) {
                const SparseColMatrix z = selection_nullspace(av);
                sparse_basis = sparse_basis ? SparseColMatrix(*sparse_basis * z) : z;
            } else if (!sparse_basis) {
                dense_basis = nullspace(av, opts);
                dense = true;
            } else {
                dense_basis = Eigen::MatrixXd(*sparse_basis) * dense_nullspace(Eigen::MatrixXd(av), opts);
                dense = true;
            }
        } else {
            const Eigen::MatrixXd av = block.apply_columns(dense_basis);
            dense_basis = dense_basis * dense_nullspace(av, opts);
        }
        const Index remaining = dense ? dense_basis.cols() : sparse_basis->cols();
        if (remaining == 0) break;
    }
    return dense ? dense_basis : Eigen::MatrixXd(*sparse_basis);
}

}  // namespace stk
