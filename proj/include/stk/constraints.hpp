#pragma once

#include "stk/options.hpp"
#include "stk/permutation.hpp"
#include "stk/tensor.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace stk {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Explicit row-sparse block.
struct SparseRows {
    SparseRowMatrix matrix;
};

/// Block of the form A_D ⊗ ... ⊗ A_1.
struct KroneckerBlock {
    KroneckerOperator op;
};

/// lambda I - P with lambda = +1 (invariant) or -1 (skew).
struct PermutationDifference {
    int lambda = 1;
    Permutation perm;
};

/// One block row A_s of a constraint matrix.
class ConstraintBlock {
public:
    using Variant = std::variant<SparseRows, KroneckerBlock, PermutationDifference>;

    ConstraintBlock(SparseRows b) : block_(std::move(b)) {}
    ConstraintBlock(KroneckerBlock b) : block_(std::move(b)) {}
    ConstraintBlock(PermutationDifference b);

    const Variant& get() const noexcept { return block_; }
    std::string kind() const;

    Index rows() const;
    Index cols() const;

    Eigen::VectorXd apply(const Eigen::VectorXd& w) const;
    Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& w) const;

    SparseRowMatrix to_sparse() const;
    Eigen::MatrixXd to_dense() const { return Eigen::MatrixXd(to_sparse()); }

private:
    Variant block_;
};

/// A w = b for tensors of `shape`, with A split into block rows and b split to match.
class ConstraintSystem {
public:
    ConstraintSystem(TensorShape shape, std::vector<ConstraintBlock> blocks, std::vector<Eigen::VectorXd> rhs);

    const TensorShape& shape() const noexcept { return shape_; }
    const std::vector<ConstraintBlock>& blocks() const noexcept { return blocks_; }
    const std::vector<Eigen::VectorXd>& rhs() const noexcept { return rhs_; }
    std::size_t block_count() const noexcept { return blocks_.size(); }

    Index row_count() const;
    Eigen::VectorXd stacked_rhs() const;
    bool homogeneous() const;

    /// Concatenated A_s w - b_s.
    Eigen::VectorXd residual(const Eigen::VectorXd& w) const;
    bool is_satisfied(const Eigen::VectorXd& w, double tol = NumericOptions{}.satisfaction_tolerance) const;

    SparseRowMatrix stacked_sparse() const;
    /// Throws DomainError when the column count exceeds `dense_threshold`.
    Eigen::MatrixXd stacked_dense(std::size_t dense_threshold = NumericOptions{}.dense_threshold) const;

private:
    TensorShape shape_;
    std::vector<ConstraintBlock> blocks_;
    std::vector<Eigen::VectorXd> rhs_;
};

/// Lower (upper) triangular: one block per consecutive mode pair (d, d+1), zeroing entries with
/// j_d < j_{d+1} (lower) or j_d > j_{d+1} (upper). Entries hit by several blocks stay duplicated.
ConstraintSystem triangular_constraints(const TensorShape& shape, bool lower);

/// Fix entries to values. Repeated entries with equal values are kept; conflicting ones throw
/// InconsistentConstraintsError.
ConstraintSystem fixed_entry_constraints(const TensorShape& shape,
                                         const std::vector<std::pair<MultiIndex, double>>& entries);

/// Sum over the 1-based modes in `summed_modes` equals `target`, given in vec order over the
/// remaining modes.
ConstraintSystem sum_constraints(const TensorShape& shape, const std::vector<std::size_t>& summed_modes,
                                 const Eigen::VectorXd& target);

/// (I - P) w = 0, or (-I - P) w = 0 when `skew`. Skew needs an even order.
ConstraintSystem invariance_constraints(const Permutation& perm, bool skew);

/// User supplied rows A w = b.
ConstraintSystem affine_constraints(const TensorShape& shape, SparseRowMatrix a, Eigen::VectorXd b);

/// Stack several systems on the same shape.
ConstraintSystem concatenate(const std::vector<ConstraintSystem>& systems);

Eigen::VectorXd residual(const ConstraintSystem& cs, const Eigen::VectorXd& w);

}  // namespace stk
