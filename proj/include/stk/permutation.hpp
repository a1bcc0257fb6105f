#pragma once

#include "stk/tensor.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace stk {

/// Order K of a permutation. Exact; Hankel permutations overflow 64 bits quickly.
using PermutationOrder = boost::multiprecision::cpp_int;

/// Entry-level permutation of a vectorized tensor, stored as the index map p: entry k moves
/// to position p[k]. As a matrix, P(p[k], k) = 1, so (P x)[p[k]] = x[k].
class Permutation {
public:
    Permutation() = default;
    /// `map` is 0-based; throws DomainError unless it is a bijection on 0..n-1 with n = shape.size().
    Permutation(TensorShape shape, std::vector<std::size_t> map);

    static Permutation identity(const TensorShape& shape);
    /// Build from the 1-based map used in serialized output.
    static Permutation from_one_based(const TensorShape& shape, const std::vector<std::size_t>& map);

    std::size_t size() const noexcept { return map_.size(); }
    const TensorShape& shape() const noexcept { return shape_; }
    const std::vector<std::size_t>& map() const noexcept { return map_; }
    std::vector<std::size_t> one_based_map() const;

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    /// out = P in; `out` must not alias `in`.
    void apply_into(const Eigen::Ref<const Eigen::VectorXd>& in, Eigen::Ref<Eigen::VectorXd> out) const;
    /// P X, row permutation of a matrix.
    Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& x) const;

    Eigen::SparseMatrix<double> matrix() const;

    friend bool operator==(const Permutation& a, const Permutation& b) {
        return a.shape_ == b.shape_ && a.map_ == b.map_;
    }

private:
    TensorShape shape_;
    std::vector<std::size_t> map_;
};

/// Disjoint cycles, 0-based. Each cycle starts at its smallest member and follows p;
/// cycles are sorted by smallest member.
struct CycleSet {
    std::vector<std::vector<std::size_t>> cycles;

    std::size_t count() const noexcept { return cycles.size(); }
    std::vector<std::size_t> sizes() const;
    std::vector<std::vector<std::size_t>> one_based() const;
};

Eigen::VectorXd apply(const Permutation& perm, const Eigen::VectorXd& x);
CycleSet cycles(const Permutation& perm);
/// Rebuild the map from a cycle decomposition (inverse of `cycles`).
Permutation from_cycles(const TensorShape& shape, const CycleSet& cs);

PermutationOrder order(const Permutation& perm);
PermutationOrder order(const CycleSet& cs);
/// K when it fits in 64 bits.
std::optional<std::uint64_t> order_u64(const PermutationOrder& k);

/// Cyclic index shift: entry (j_1,...,j_D) moves to (j_D, j_1, ..., j_{D-1}).
Permutation cyclic_shift_permutation(const TensorShape& shape);
/// One cycle per orbit of the index-permutation group, members in lexicographic order.
Permutation symmetric_permutation(const TensorShape& shape);
/// (j_1,...,j_D) -> (J_1-j_1+1, ..., J_D-j_D+1).
Permutation centrosymmetric_permutation(const TensorShape& shape);
/// One cycle per constant index sum, members in lexicographic order.
Permutation hankel_permutation(const TensorShape& shape);
/// j_d -> j_d + 1 in every mode, J_d + 1 wrapping to 1.
Permutation toeplitz_permutation(const TensorShape& shape);
/// j_d -> mod(j_d + 1, J_d), a zero result mapping to J_d.
Permutation circulant_permutation(const TensorShape& shape);

}  // namespace stk
