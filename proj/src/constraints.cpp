#include "stk/constraints.hpp"

#include "stk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace stk {

namespace {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

}  // namespace

ConstraintBlock::ConstraintBlock(PermutationDifference b) : block_(std::move(b)) {
    const auto& pd = std::get<PermutationDifference>(block_);
    if (pd.lambda != 1 && pd.lambda != -1) {
        throw DomainError("permutation difference needs lambda = +1 or -1");
    }
}

std::string ConstraintBlock::kind() const {
    return std::visit(overloaded{[](const SparseRows&) { return std::string("sparse_rows"); },
                                 [](const KroneckerBlock&) { return std::string("kronecker"); },
                                 [](const PermutationDifference&) { return std::string("permutation_difference"); }},
                      block_);
}

Index ConstraintBlock::rows() const {
    return std::visit(overloaded{[](const SparseRows& b) { return b.matrix.rows(); },
                                 [](const KroneckerBlock& b) { return b.op.rows(); },
                                 [](const PermutationDifference& b) { return static_cast<Index>(b.perm.size()); }},
                      block_);
}

Index ConstraintBlock::cols() const {
    return std::visit(overloaded{[](const SparseRows& b) { return b.matrix.cols(); },
                                 [](const KroneckerBlock& b) { return b.op.cols(); },
                                 [](const PermutationDifference& b) { return static_cast<Index>(b.perm.size()); }},
                      block_);
}

Eigen::VectorXd ConstraintBlock::apply(const Eigen::VectorXd& w) const {
    if (w.size() != cols()) {
        throw DomainError("constraint block has " + std::to_string(cols()) + " columns, vector has length " +
                          std::to_string(w.size()));
    }
    return std::visit(overloaded{[&](const SparseRows& b) -> Eigen::VectorXd { return b.matrix * w; },
                                 [&](const KroneckerBlock& b) -> Eigen::VectorXd { return b.op.apply(w); },
                                 [&](const PermutationDifference& b) -> Eigen::VectorXd {
                                     return b.lambda * w - b.perm.apply(w);
                                 }},
                      block_);
}

Eigen::MatrixXd ConstraintBlock::apply_columns(const Eigen::MatrixXd& w) const {
    if (w.rows() != cols()) {
        throw DomainError("constraint block column count does not match operand rows");
    }
    return std::visit(overloaded{[&](const SparseRows& b) -> Eigen::MatrixXd { return b.matrix * w; },
                                 [&](const KroneckerBlock& b) -> Eigen::MatrixXd { return b.op.apply_columns(w); },
                                 [&](const PermutationDifference& b) -> Eigen::MatrixXd {
                                     return b.lambda * w - b.perm.apply_rows(w);
                                 }},
                      block_);
}

SparseRowMatrix ConstraintBlock::to_sparse() const {
    return std::visit(overloaded{[](const SparseRows& b) -> SparseRowMatrix { return b.matrix; },
                                 [](const KroneckerBlock& b) -> SparseRowMatrix { return b.op.to_sparse(); },
                                 [](const PermutationDifference& b) -> SparseRowMatrix {
                                     const auto n = static_cast<Index>(b.perm.size());
                                     std::vector<Eigen::Triplet<double>> trip;
                                     trip.reserve(2 * b.perm.size());
                                     for (Index k = 0; k < n; ++k) {
                                         trip.emplace_back(k, k, static_cast<double>(b.lambda));
                                         trip.emplace_back(static_cast<Index>(b.perm.map()[k]), k, -1.0);
                                     }
                                     SparseRowMatrix m(n, n);
                                     m.setFromTriplets(trip.begin(), trip.end());
                                     m.prune(0.0);
                                     return m;
                                 }},
                      block_);
}

ConstraintSystem::ConstraintSystem(TensorShape shape, std::vector<ConstraintBlock> blocks,
                                   std::vector<Eigen::VectorXd> rhs)
    : shape_(std::move(shape)), blocks_(std::move(blocks)), rhs_(std::move(rhs)) {
    if (blocks_.size() != rhs_.size()) {
        throw DomainError("constraint system needs one right-hand side per block");
    }
    const auto n = static_cast<Index>(shape_.size());
    for (std::size_t s = 0; s < blocks_.size(); ++s) {
        if (blocks_[s].cols() != n) {
            throw DomainError("constraint block " + std::to_string(s + 1) + " has " +
                              std::to_string(blocks_[s].cols()) + " columns, shape has " + std::to_string(n) +
                              " entries");
        }
        if (blocks_[s].rows() != rhs_[s].size()) {
            throw DomainError("right-hand side of block " + std::to_string(s + 1) + " has wrong length");
        }
    }
}

Index ConstraintSystem::row_count() const {
    Index r = 0;
    for (const auto& b : blocks_) r += b.rows();
    return r;
}

Eigen::VectorXd ConstraintSystem::stacked_rhs() const {
    Eigen::VectorXd b(row_count());
    Index off = 0;
    for (const auto& r : rhs_) {
        b.segment(off, r.size()) = r;
        off += r.size();
    }
    return b;
}

bool ConstraintSystem::homogeneous() const {
    for (const auto& r : rhs_) {
        if (r.size() > 0 && r.cwiseAbs().maxCoeff() != 0.0) return false;
    }
    return true;
}

Eigen::VectorXd ConstraintSystem::residual(const Eigen::VectorXd& w) const {
    if (w.size() != static_cast<Index>(shape_.size())) {
        throw DomainError("residual: vector has length " + std::to_string(w.size()) + ", shape " +
                          shape_.to_string() + " has " + std::to_string(shape_.size()) + " entries");
    }
    Eigen::VectorXd out(row_count());
    Index off = 0;
    for (std::size_t s = 0; s < blocks_.size(); ++s) {
        const Index m = blocks_[s].rows();
        out.segment(off, m) = blocks_[s].apply(w) - rhs_[s];
        off += m;
    }
    return out;
}

bool ConstraintSystem::is_satisfied(const Eigen::VectorXd& w, double tol) const {
    const Eigen::VectorXd r = residual(w);
    return r.size() == 0 || r.cwiseAbs().maxCoeff() <= tol;
}

SparseRowMatrix ConstraintSystem::stacked_sparse() const {
    std::vector<Eigen::Triplet<double>> trip;
    Index off = 0;
    for (const auto& b : blocks_) {
        const SparseRowMatrix m = b.to_sparse();
        for (Index i = 0; i < m.outerSize(); ++i) {
            for (SparseRowMatrix::InnerIterator it(m, i); it; ++it) {
                trip.emplace_back(off + it.row(), it.col(), it.value());
            }
        }
        off += b.rows();
    }
    SparseRowMatrix a(off, static_cast<Index>(shape_.size()));
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

Eigen::MatrixXd ConstraintSystem::stacked_dense(std::size_t dense_threshold) const {
    if (shape_.size() > dense_threshold) {
        throw DomainError("constraint matrix with " + std::to_string(shape_.size()) +
                          " columns exceeds the densification threshold " + std::to_string(dense_threshold));
    }
    return Eigen::MatrixXd(stacked_sparse());
}

ConstraintSystem triangular_constraints(const TensorShape& shape, bool lower) {
    if (!shape.all_dims_equal()) {
        throw UnsupportedShapeError("triangular constraints require equal dimensions, got " + shape.to_string());
    }
    if (shape.order() < 2) {
        throw DomainError("triangular constraints need order D >= 2");
    }
    const std::size_t order = shape.order();
    const auto j = static_cast<Index>(shape.dim(0));
    const auto n = static_cast<Index>(shape.size());

    if (j == 1) {
        return ConstraintSystem(shape, {ConstraintBlock(SparseRows{SparseRowMatrix(0, n)})},
                                {Eigen::VectorXd(0)});
    }

    // Selection of index pairs (a, b) of two consecutive modes, rows in lexicographic order.
    Eigen::MatrixXd pair_selector = Eigen::MatrixXd::Zero(j * (j - 1) / 2, j * j);
    Index row = 0;
    for (Index a = 0; a < j; ++a) {
        for (Index b = 0; b < j; ++b) {
            if (lower ? (a < b) : (a > b)) {
                pair_selector(row++, a + b * j) = 1.0;
            }
        }
    }

    std::vector<ConstraintBlock> blocks;
    std::vector<Eigen::VectorXd> rhs;
    for (std::size_t d = 0; d + 1 < order; ++d) {
        std::vector<Eigen::MatrixXd> factors;
        for (std::size_t m = 0; m < d; ++m) factors.push_back(Eigen::MatrixXd::Identity(j, j));
        factors.push_back(pair_selector);
        for (std::size_t m = d + 2; m < order; ++m) factors.push_back(Eigen::MatrixXd::Identity(j, j));
        KroneckerOperator op(std::move(factors));
        rhs.push_back(Eigen::VectorXd::Zero(op.rows()));
        blocks.emplace_back(KroneckerBlock{std::move(op)});
    }
    return ConstraintSystem(shape, std::move(blocks), std::move(rhs));
}

ConstraintSystem fixed_entry_constraints(const TensorShape& shape,
                                         const std::vector<std::pair<MultiIndex, double>>& entries) {
    if (entries.empty()) {
        throw DomainError("fixed-entry constraints need at least one entry");
    }
    std::map<std::size_t, double> seen;
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd b(static_cast<Index>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::size_t k = linearize(entries[i].first, shape) - 1;
        const double v = entries[i].second;
        if (auto it = seen.find(k); it != seen.end() && it->second != v) {
            throw InconsistentConstraintsError("entry " + std::to_string(k + 1) + " fixed to both " +
                                                   std::to_string(it->second) + " and " + std::to_string(v),
                                               std::abs(it->second - v));
        }
        seen[k] = v;
        trip.emplace_back(static_cast<Index>(i), static_cast<Index>(k), 1.0);
        b[static_cast<Index>(i)] = v;
    }
    SparseRowMatrix a(static_cast<Index>(entries.size()), static_cast<Index>(shape.size()));
    a.setFromTriplets(trip.begin(), trip.end());
    return ConstraintSystem(shape, {ConstraintBlock(SparseRows{std::move(a)})}, {std::move(b)});
}

ConstraintSystem sum_constraints(const TensorShape& shape, const std::vector<std::size_t>& summed_modes,
                                 const Eigen::VectorXd& target) {
    if (summed_modes.empty()) {
        throw DomainError("sum constraints need at least one summed mode");
    }
    std::set<std::size_t> modes;
    for (std::size_t m : summed_modes) {
        if (m < 1 || m > shape.order()) {
            throw DomainError("summed mode " + std::to_string(m) + " out of range 1.." +
                              std::to_string(shape.order()));
        }
        if (!modes.insert(m).second) {
            throw DomainError("summed mode " + std::to_string(m) + " listed twice");
        }
    }
    std::vector<Eigen::MatrixXd> factors;
    Index rows = 1;
    for (std::size_t d = 0; d < shape.order(); ++d) {
        const auto jd = static_cast<Index>(shape.dim(d));
        if (modes.count(d + 1)) {
            factors.push_back(Eigen::MatrixXd::Ones(1, jd));
        } else {
            factors.push_back(Eigen::MatrixXd::Identity(jd, jd));
            rows *= jd;
        }
    }
    if (target.size() != rows) {
        throw DomainError("sum target has " + std::to_string(target.size()) + " entries, expected " +
                          std::to_string(rows));
    }
    return ConstraintSystem(shape, {ConstraintBlock(KroneckerBlock{KroneckerOperator(std::move(factors))})},
                            {target});
}

ConstraintSystem invariance_constraints(const Permutation& perm, bool skew) {
    if (skew) {
        const PermutationOrder k = order(perm);
        if (k % 2 != 0) {
            throw DomainError("skew invariance needs a permutation of even order, got K = " + k.str());
        }
    }
    const auto n = static_cast<Index>(perm.size());
    return ConstraintSystem(perm.shape(), {ConstraintBlock(PermutationDifference{skew ? -1 : 1, perm})},
                            {Eigen::VectorXd::Zero(n)});
}

ConstraintSystem affine_constraints(const TensorShape& shape, SparseRowMatrix a, Eigen::VectorXd b) {
    return ConstraintSystem(shape, {ConstraintBlock(SparseRows{std::move(a)})}, {std::move(b)});
}

ConstraintSystem concatenate(const std::vector<ConstraintSystem>& systems) {
    if (systems.empty()) {
        throw DomainError("cannot concatenate zero constraint systems");
    }
    std::vector<ConstraintBlock> blocks;
    std::vector<Eigen::VectorXd> rhs;
    for (const auto& cs : systems) {
        if (!(cs.shape() == systems.front().shape())) {
            throw DomainError("concatenated constraint systems must share a shape");
        }
        blocks.insert(blocks.end(), cs.blocks().begin(), cs.blocks().end());
        rhs.insert(rhs.end(), cs.rhs().begin(), cs.rhs().end());
    }
    return ConstraintSystem(systems.front().shape(), std::move(blocks), std::move(rhs));
}

Eigen::VectorXd residual(const ConstraintSystem& cs, const Eigen::VectorXd& w) {
    return cs.residual(w);
}

}  // namespace stk
