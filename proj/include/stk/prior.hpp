#pragma once

#include "stk/constraints.hpp"
#include "stk/options.hpp"
#include "stk/permutation.hpp"
#include "stk/tensor.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace stk {

/// Square-root covariance F with P0 = F F^T; its columns span the nullspace of A.
struct DenseFactor {
    Eigen::MatrixXd factor;
};

/// Orthonormal cycle basis V scaled by sigma: P0 = sigma^2 V V^T.
struct SparseCycleBasis {
    Eigen::SparseMatrix<double> basis;
    double sigma = 1.0;
    int sign = 1;
};

/// Implicit sigma^2 (sum_k sign^k P^k) / K, with the permutation kept as its index map.
struct PermutationAverage {
    Permutation perm;
    std::uint64_t order = 1;
    int sign = 1;
    double sigma = 1.0;
};

using SqrtCovariance = std::variant<DenseFactor, SparseCycleBasis, PermutationAverage>;

/// Gaussian prior N(w0, P0) over the vectorized entries of a structured tensor.
class StructuredPrior {
public:
    StructuredPrior(TensorShape shape, Eigen::VectorXd w0, SqrtCovariance sqrt_cov);

    const TensorShape& shape() const noexcept { return shape_; }
    Index size() const noexcept { return static_cast<Index>(shape_.size()); }
    const Eigen::VectorXd& mean() const noexcept { return w0_; }
    const SqrtCovariance& sqrt_covariance() const noexcept { return sqrt_cov_; }
    std::string representation() const;

    /// Length of the standard normal vector consumed by one draw.
    Index inner_dimension() const;

    /// True for the cycle-basis and permutation-average forms, whose covariance is sigma^2 times a projector.
    bool is_scaled_projector() const noexcept;
    /// sigma for the projector forms, 1 for a dense factor.
    double scale() const noexcept;

    /// P0 x. The permutation-average path applies P repeatedly, O(K n).
    Eigen::VectorXd apply_covariance(const Eigen::VectorXd& x) const;
    /// sqrt(P0) z for z of length inner_dimension().
    Eigen::VectorXd apply_sqrt(const Eigen::VectorXd& z) const;

    /// Dense F with P0 = F F^T and F of full column rank (the support coordinates).
    Eigen::MatrixXd support_factor() const;
    /// Densified P0. The permutation-average form is evaluated from its power sum.
    Eigen::MatrixXd dense_covariance() const;
    /// Pseudo-inverse of the symmetric square root of P0, used as the prior square-root precision.
    Eigen::MatrixXd precision_sqrt_dense() const;

private:
    TensorShape shape_;
    Eigen::VectorXd w0_;
    SqrtCovariance sqrt_cov_;
};

/// Prior from the nullspace of A. The stacked matrix is used below the densification threshold,
/// the block-recursive route above it. sqrt(P0) = V2 T with T = sigma I unless `mixing` is given.
/// Without `w0`, the mean is zero for b = 0 and the minimum-norm least-squares solution otherwise.
StructuredPrior prior_from_constraints(const ConstraintSystem& cs, const std::optional<Eigen::VectorXd>& w0 = {},
                                       const std::optional<Eigen::MatrixXd>& mixing = {}, double sigma = 1.0,
                                       const NumericOptions& opts = {});

/// Averaged powers of P (alternating signs when `skew`). Refuses K above opts.max_average_order.
StructuredPrior prior_from_permutation(const Permutation& perm, bool skew,
                                       const std::optional<Eigen::VectorXd>& w0 = {}, double sigma = 1.0,
                                       const NumericOptions& opts = {});

/// Sparse orthonormal basis with one column per cycle (per even cycle when `skew`).
StructuredPrior prior_from_cycles(const Permutation& perm, bool skew, const std::optional<Eigen::VectorXd>& w0 = {},
                                  double sigma = 1.0, const NumericOptions& opts = {});

/// Cycle basis when K exceeds opts.cycle_route_order, averaged powers otherwise.
StructuredPrior prior_for_permutation(const Permutation& perm, bool skew,
                                      const std::optional<Eigen::VectorXd>& w0 = {}, double sigma = 1.0,
                                      const NumericOptions& opts = {});

/// Column-sparse cycle basis of `perm`; entries 1/sqrt(|C_r|), signs alternating when `skew`.
Eigen::SparseMatrix<double> cycle_basis(const Permutation& perm, bool skew);

/// One draw w0 + sqrt(P0) x with x standard normal.
Eigen::VectorXd sample(const StructuredPrior& prior, std::mt19937_64& rng);

/// Sampler for tensors whose last-mode fibers sum to one, using the explicit block basis
/// (x_1 + ... + x_{J-1}; -x_1; ...; -x_{J-1}). Other summed modes use the generic nullspace prior.
class SumToOneSampler {
public:
    SumToOneSampler(const TensorShape& shape, const std::vector<std::size_t>& summed_modes, double sigma = 1.0,
                    const NumericOptions& opts = {});

    bool explicit_basis() const noexcept { return !generic_.has_value(); }
    const TensorShape& shape() const noexcept { return shape_; }
    Index inner_dimension() const;
    /// w0 + sigma B x for a given x of length inner_dimension().
    Eigen::VectorXd map(const Eigen::VectorXd& x) const;
    Eigen::VectorXd sample(std::mt19937_64& rng) const;
    /// The constraint system being sampled.
    ConstraintSystem constraints() const;
    /// The block basis B (explicit route only).
    Eigen::SparseMatrix<double> basis() const;

private:
    TensorShape shape_;
    std::vector<std::size_t> modes_;
    double sigma_;
    std::optional<StructuredPrior> generic_;
};

struct PreflightReport {
    bool ok = true;
    std::vector<std::string> failures;
};

/// Probe-vector checks of symmetry, positive semi-definiteness, idempotency (projector forms),
/// and, when `cs` is given, that the mean and a draw satisfy the constraints.
PreflightReport preflight(const StructuredPrior& prior, const ConstraintSystem* cs = nullptr,
                          std::uint64_t seed = 0, const NumericOptions& opts = {});

}  // namespace stk
