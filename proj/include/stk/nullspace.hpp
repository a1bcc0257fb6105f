#pragma once

#include "stk/constraints.hpp"
#include "stk/options.hpp"

#include <Eigen/Core>

#include <vector>

namespace stk {

/// Singular values at or below this are treated as zero for an m x n matrix.
double rank_cutoff(double sigma_max, Index rows, Index cols, const NumericOptions& opts = {});

/// Orthonormal basis of the right nullspace of a dense matrix, via a full SVD.
/// A matrix without rows has the identity as its nullspace basis.
Eigen::MatrixXd dense_nullspace(const Eigen::MatrixXd& a, const NumericOptions& opts = {});

/// Nullspace of a sparse matrix. Rows with a single nonzero (selection rows) are resolved
/// exactly without densifying; anything else is densified when the column count allows it.
Eigen::MatrixXd nullspace(const SparseRowMatrix& a, const NumericOptions& opts = {});

/// Block-recursive nullspace: V <- null(A_1), then V <- V null(A_s V) for each later block.
/// The stacked matrix is never formed. An empty nullspace yields a zero-column basis.
Eigen::MatrixXd recursive_nullspace(const std::vector<ConstraintBlock>& blocks, const NumericOptions& opts = {});

}  // namespace stk
