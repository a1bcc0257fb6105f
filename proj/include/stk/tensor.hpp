#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace stk {

using Index = Eigen::Index;

/// Dimensions J_1..J_D of an order-D tensor. Entries are linearized column-major
/// (mode 1 fastest), so vec(W)[j_1 + (j_2-1)J_1 + ...] = w_{j_1,...,j_D}.
class TensorShape {
public:
    TensorShape() = default;
    explicit TensorShape(std::vector<std::size_t> dims);
    TensorShape(std::initializer_list<std::size_t> dims);

    /// D equal dimensions J.
    static TensorShape cube(std::size_t order, std::size_t dim);

    std::size_t order() const noexcept { return dims_.size(); }
    std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
    const std::vector<std::size_t>& dims() const noexcept { return dims_; }

    /// J_1 * ... * J_D.
    std::size_t size() const noexcept { return size_; }

    bool all_dims_equal() const noexcept;

    /// Product of dims before `mode` (0-based mode).
    std::size_t stride(std::size_t mode) const { return strides_.at(mode); }

    std::string to_string() const;

    friend bool operator==(const TensorShape&, const TensorShape&) = default;

private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

/// 1-based multi-index (j_1, ..., j_D).
struct MultiIndex {
    std::vector<std::size_t> indices;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<std::size_t> idx) : indices(std::move(idx)) {}
    MultiIndex(std::initializer_list<std::size_t> idx) : indices(idx) {}

    std::size_t operator[](std::size_t mode) const { return indices[mode]; }
    std::size_t order() const noexcept { return indices.size(); }

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// Merged index j_1 + (j_2-1)J_1 + ... + (j_D-1)J_1...J_{D-1}, 1-based.
std::size_t linearize(const MultiIndex& mi, const TensorShape& shape);

/// Inverse of linearize; `k` is 1-based.
MultiIndex delinearize(std::size_t k, const TensorShape& shape);

/// 0-based counterparts used on hot paths. No range checks beyond debug asserts.
std::size_t offset_of(std::span<const std::size_t> zero_based, const TensorShape& shape);
void index_at(std::size_t offset, const TensorShape& shape, std::span<std::size_t> zero_based_out);

/// (A_D ⊗ ... ⊗ A_1) applied mode-wise. Factor d acts along mode d of the operand, so the
/// operand shape is (cols(A_1), ..., cols(A_D)) and the result shape is (rows(A_1), ..., rows(A_D)).
class KroneckerOperator {
public:
    KroneckerOperator() = default;
    explicit KroneckerOperator(std::vector<Eigen::MatrixXd> factors);

    const std::vector<Eigen::MatrixXd>& factors() const noexcept { return factors_; }
    TensorShape operand_shape() const;
    TensorShape result_shape() const;
    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }

    /// Sequence of n-mode products; the Kronecker product itself is never formed.
    Eigen::VectorXd apply(const Eigen::VectorXd& w) const;
    Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& w) const;

    Eigen::SparseMatrix<double, Eigen::RowMajor> to_sparse() const;
    Eigen::MatrixXd to_dense() const;

private:
    std::vector<Eigen::MatrixXd> factors_;
    Index rows_ = 0;
    Index cols_ = 0;
};

Eigen::VectorXd apply_kronecker(const KroneckerOperator& op, const Eigen::VectorXd& w);

}  // namespace stk
