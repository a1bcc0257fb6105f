#include "stk/prior.hpp"

#include "stk/errors.hpp"
#include "stk/nullspace.hpp"

#include "checked_svd.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace stk {

namespace {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

Eigen::VectorXd standard_normal(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::VectorXd x(n);
    for (Index i = 0; i < n; ++i) x[i] = dist(rng);
    return x;
}

// (sum_{k=1..K} sign^k P^k x) / K.
Eigen::VectorXd power_average(const PermutationAverage& pa, const Eigen::VectorXd& x) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(x.size());
    Eigen::VectorXd cur = x;
    Eigen::VectorXd next(x.size());
    double s = 1.0;
    for (std::uint64_t k = 1; k <= pa.order; ++k) {
        pa.perm.apply_into(cur, next);
        cur.swap(next);
        s *= pa.sign;
        acc += s * cur;
    }
    return acc / static_cast<double>(pa.order);
}

void require_length(const Eigen::VectorXd& x, Index n, const char* what) {
    if (x.size() != n) {
        throw DomainError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                          std::to_string(x.size()));
    }
}

void require_sigma(double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw DomainError("prior scale sigma must be finite and non-negative");
    }
}

Eigen::VectorXd invariant_mean(const Permutation& perm, bool skew, const std::optional<Eigen::VectorXd>& w0,
                               const NumericOptions& opts) {
    const auto n = static_cast<Index>(perm.size());
    if (!w0) return Eigen::VectorXd::Zero(n);
    require_length(*w0, n, "prior mean");
    const Eigen::VectorXd r = perm.apply(*w0) - (skew ? -1.0 : 1.0) * *w0;
    if (n > 0 && r.cwiseAbs().maxCoeff() > opts.satisfaction_tolerance) {
        throw DomainError(std::string("prior mean is not ") + (skew ? "skew-" : "") +
                          "invariant under the permutation (max deviation " +
                          std::to_string(r.cwiseAbs().maxCoeff()) + ")");
    }
    return *w0;
}

Eigen::VectorXd least_squares_mean(const ConstraintSystem& cs, const NumericOptions& opts) {
    const SparseRowMatrix a = cs.stacked_sparse();
    const Eigen::VectorXd b = cs.stacked_rhs();
    Eigen::VectorXd w;
    if (static_cast<std::size_t>(a.cols()) <= opts.dense_threshold) {
        w = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(Eigen::MatrixXd(a)).solve(b);
    } else if (static_cast<std::size_t>(a.rows()) <= opts.dense_threshold) {
        // Minimum-norm solution lies in the row space: w = A^T (A A^T)^+ b.
        const Eigen::MatrixXd gram = Eigen::MatrixXd(SparseRowMatrix(a * a.transpose()));
        w = a.transpose() * Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(gram).solve(b);
    } else {
        throw DomainError("least-squares mean for a system with " + std::to_string(a.rows()) + " rows and " +
                          std::to_string(a.cols()) + " columns exceeds the densification threshold");
    }
    return w;
}

}  // namespace

StructuredPrior::StructuredPrior(TensorShape shape, Eigen::VectorXd w0, SqrtCovariance sqrt_cov)
    : shape_(std::move(shape)), w0_(std::move(w0)), sqrt_cov_(std::move(sqrt_cov)) {
    const Index n = size();
    require_length(w0_, n, "prior mean");
    std::visit(overloaded{[&](const DenseFactor& f) {
                              if (f.factor.rows() != n) throw DomainError("dense factor has wrong row count");
                          },
                          [&](const SparseCycleBasis& v) {
                              if (v.basis.rows() != n) throw DomainError("cycle basis has wrong row count");
                              require_sigma(v.sigma);
                          },
                          [&](const PermutationAverage& p) {
                              if (static_cast<Index>(p.perm.size()) != n) {
                                  throw DomainError("permutation size does not match the prior shape");
                              }
                              if (p.order == 0) throw DomainError("permutation order must be positive");
                              require_sigma(p.sigma);
                          }},
               sqrt_cov_);
}

std::string StructuredPrior::representation() const {
    return std::visit(overloaded{[](const DenseFactor&) { return std::string("dense_factor"); },
                                 [](const SparseCycleBasis&) { return std::string("sparse_cycle_basis"); },
                                 [](const PermutationAverage&) { return std::string("permutation_average"); }},
                      sqrt_cov_);
}

Index StructuredPrior::inner_dimension() const {
    return std::visit(overloaded{[](const DenseFactor& f) { return f.factor.cols(); },
                                 [](const SparseCycleBasis& v) { return v.basis.cols(); },
                                 [](const PermutationAverage& p) { return static_cast<Index>(p.perm.size()); }},
                      sqrt_cov_);
}

bool StructuredPrior::is_scaled_projector() const noexcept {
    return !std::holds_alternative<DenseFactor>(sqrt_cov_);
}

double StructuredPrior::scale() const noexcept {
    if (const auto* v = std::get_if<SparseCycleBasis>(&sqrt_cov_)) return v->sigma;
    if (const auto* p = std::get_if<PermutationAverage>(&sqrt_cov_)) return p->sigma;
    return 1.0;
}

Eigen::VectorXd StructuredPrior::apply_covariance(const Eigen::VectorXd& x) const {
    require_length(x, size(), "covariance operand");
    return std::visit(
        overloaded{[&](const DenseFactor& f) -> Eigen::VectorXd { return f.factor * (f.factor.transpose() * x); },
                   [&](const SparseCycleBasis& v) -> Eigen::VectorXd {
                       return v.sigma * v.sigma * (v.basis * (v.basis.transpose() * x));
                   },
                   [&](const PermutationAverage& p) -> Eigen::VectorXd {
                       return p.sigma * p.sigma * power_average(p, x);
                   }},
        sqrt_cov_);
}

Eigen::VectorXd StructuredPrior::apply_sqrt(const Eigen::VectorXd& z) const {
    require_length(z, inner_dimension(), "square-root operand");
    return std::visit(overloaded{[&](const DenseFactor& f) -> Eigen::VectorXd { return f.factor * z; },
                                 [&](const SparseCycleBasis& v) -> Eigen::VectorXd { return v.sigma * (v.basis * z); },
                                 [&](const PermutationAverage& p) -> Eigen::VectorXd {
                                     return p.sigma * power_average(p, z);
                                 }},
                      sqrt_cov_);
}

Eigen::MatrixXd StructuredPrior::support_factor() const {
    return std::visit(overloaded{[](const DenseFactor& f) -> Eigen::MatrixXd { return f.factor; },
                                 [](const SparseCycleBasis& v) -> Eigen::MatrixXd {
                                     return v.sigma * Eigen::MatrixXd(v.basis);
                                 },
                                 [](const PermutationAverage& p) -> Eigen::MatrixXd {
                                     return p.sigma * Eigen::MatrixXd(cycle_basis(p.perm, p.sign < 0));
                                 }},
                      sqrt_cov_);
}

Eigen::MatrixXd StructuredPrior::dense_covariance() const {
    return std::visit(
        overloaded{[](const DenseFactor& f) -> Eigen::MatrixXd { return f.factor * f.factor.transpose(); },
                   [](const SparseCycleBasis& v) -> Eigen::MatrixXd {
                       const Eigen::MatrixXd b(v.basis);
                       return v.sigma * v.sigma * b * b.transpose();
                   },
                   [](const PermutationAverage& p) -> Eigen::MatrixXd {
                       // Column j of P^k is e_{p^k(j)}; accumulate the K powers entrywise.
                       const std::size_t n = p.perm.size();
                       Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Index>(n), static_cast<Index>(n));
                       std::vector<std::size_t> pos(n);
                       for (std::size_t j = 0; j < n; ++j) pos[j] = j;
                       const double w = p.sigma * p.sigma / static_cast<double>(p.order);
                       double s = 1.0;
                       for (std::uint64_t k = 1; k <= p.order; ++k) {
                           s *= p.sign;
                           for (std::size_t j = 0; j < n; ++j) {
                               pos[j] = p.perm.map()[pos[j]];
                               m(static_cast<Index>(pos[j]), static_cast<Index>(j)) += s * w;
                           }
                       }
                       return m;
                   }},
        sqrt_cov_);
}

Eigen::MatrixXd StructuredPrior::precision_sqrt_dense() const {
    const Index n = size();
    if (is_scaled_projector()) {
        const double sigma = scale();
        if (sigma == 0.0) return Eigen::MatrixXd::Zero(n, n);
        // (sigma P0)^+ = P0 / sigma for a projector P0.
        return dense_covariance() / (sigma * sigma * sigma);
    }
    const auto& f = std::get<DenseFactor>(sqrt_cov_).factor;
    if (f.cols() == 0) return Eigen::MatrixXd::Zero(n, n);
    const detail::CheckedSvd svd(f);
    const auto& s = svd.s;
    const double cut = rank_cutoff(s[0], f.rows(), f.cols());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < s.size(); ++i) {
        if (s[i] > cut) out += svd.u.col(i) * svd.u.col(i).transpose() / s[i];
    }
    return out;
}

StructuredPrior prior_from_constraints(const ConstraintSystem& cs, const std::optional<Eigen::VectorXd>& w0,
                                       const std::optional<Eigen::MatrixXd>& mixing, double sigma,
                                       const NumericOptions& opts) {
    require_sigma(sigma);
    const TensorShape& shape = cs.shape();
    const auto n = static_cast<Index>(shape.size());

    Eigen::MatrixXd v2;
    if (cs.block_count() == 0 || static_cast<std::size_t>(n) <= opts.dense_threshold) {
        v2 = nullspace(cs.stacked_sparse(), opts);
    } else {
        v2 = recursive_nullspace(cs.blocks(), opts);
    }

    Eigen::MatrixXd factor;
    if (mixing) {
        if (mixing->rows() != v2.cols() || mixing->cols() != v2.cols()) {
            throw DomainError("mixing matrix T must be " + std::to_string(v2.cols()) + " x " +
                              std::to_string(v2.cols()));
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(*mixing);
        if (cod.rank() < mixing->cols()) {
            throw DomainError("mixing matrix T is singular");
        }
        factor = v2 * *mixing;
    } else {
        factor = sigma * v2;
    }

    Eigen::VectorXd mean;
    if (w0) {
        require_length(*w0, n, "prior mean");
        if (!cs.is_satisfied(*w0, opts.satisfaction_tolerance)) {
            throw DomainError("prior mean does not satisfy the constraints");
        }
        mean = *w0;
    } else if (cs.homogeneous()) {
        mean = Eigen::VectorXd::Zero(n);
    } else {
        mean = least_squares_mean(cs, opts);
        const Eigen::VectorXd b = cs.stacked_rhs();
        const Eigen::VectorXd r = cs.residual(mean);
        const double scale = std::max(1.0, b.size() > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
        if (r.size() > 0 && r.cwiseAbs().maxCoeff() > opts.satisfaction_tolerance * scale) {
            throw InconsistentConstraintsError("constraint system A w = b has no solution (least-squares residual " +
                                                   std::to_string(r.norm()) + ")",
                                               r.norm());
        }
    }
    return StructuredPrior(shape, std::move(mean), DenseFactor{std::move(factor)});
}

StructuredPrior prior_from_permutation(const Permutation& perm, bool skew, const std::optional<Eigen::VectorXd>& w0,
                                       double sigma, const NumericOptions& opts) {
    require_sigma(sigma);
    const PermutationOrder k = order(perm);
    const auto ku = order_u64(k);
    if (!ku || *ku > opts.max_average_order) {
        throw DomainError("permutation order K = " + k.str() + " exceeds the averaged-powers limit " +
                          std::to_string(opts.max_average_order) + "; use the cycle-basis prior");
    }
    if (skew && *ku % 2 != 0) {
        throw DomainError("skew prior needs a permutation of even order, got K = " + k.str());
    }
    Eigen::VectorXd mean = invariant_mean(perm, skew, w0, opts);
    return StructuredPrior(perm.shape(), std::move(mean), PermutationAverage{perm, *ku, skew ? -1 : 1, sigma});
}

Eigen::SparseMatrix<double> cycle_basis(const Permutation& perm, bool skew) {
    const CycleSet cs = cycles(perm);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(perm.size());
    Index col = 0;
    for (const auto& c : cs.cycles) {
        if (skew && c.size() % 2 != 0) continue;
        const double v = 1.0 / std::sqrt(static_cast<double>(c.size()));
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double s = (skew && i % 2 == 1) ? -v : v;
            trip.emplace_back(static_cast<Index>(c[i]), col, s);
        }
        ++col;
    }
    Eigen::SparseMatrix<double> basis(static_cast<Index>(perm.size()), col);
    basis.setFromTriplets(trip.begin(), trip.end());
    return basis;
}

StructuredPrior prior_from_cycles(const Permutation& perm, bool skew, const std::optional<Eigen::VectorXd>& w0,
                                  double sigma, const NumericOptions& opts) {
    require_sigma(sigma);
    Eigen::VectorXd mean = invariant_mean(perm, skew, w0, opts);
    return StructuredPrior(perm.shape(), std::move(mean), SparseCycleBasis{cycle_basis(perm, skew), sigma, skew ? -1 : 1});
}

StructuredPrior prior_for_permutation(const Permutation& perm, bool skew, const std::optional<Eigen::VectorXd>& w0,
                                      double sigma, const NumericOptions& opts) {
    if (order(perm) > PermutationOrder(opts.cycle_route_order)) {
        return prior_from_cycles(perm, skew, w0, sigma, opts);
    }
    return prior_from_permutation(perm, skew, w0, sigma, opts);
}

Eigen::VectorXd sample(const StructuredPrior& prior, std::mt19937_64& rng) {
    const Eigen::VectorXd x = standard_normal(prior.inner_dimension(), rng);
    if (const auto* pa = std::get_if<PermutationAverage>(&prior.sqrt_covariance())) {
        // Accumulate K successive permutations of x, divide by K, add the mean.
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(x.size());
        Eigen::VectorXd y = x;
        Eigen::VectorXd next(x.size());
        double s = 1.0;
        for (std::uint64_t k = 1; k <= pa->order; ++k) {
            pa->perm.apply_into(y, next);
            y.swap(next);
            s *= pa->sign;
            acc += s * y;
        }
        return prior.mean() + (pa->sigma / static_cast<double>(pa->order)) * acc;
    }
    return prior.mean() + prior.apply_sqrt(x);
}

SumToOneSampler::SumToOneSampler(const TensorShape& shape, const std::vector<std::size_t>& summed_modes,
                                 double sigma, const NumericOptions& opts)
    : shape_(shape), modes_(summed_modes), sigma_(sigma) {
    require_sigma(sigma);
    if (!(modes_.size() == 1 && modes_.front() == shape_.order())) {
        generic_ = prior_from_constraints(constraints(), {}, {}, sigma, opts);
    }
}

ConstraintSystem SumToOneSampler::constraints() const {
    Index rows = 1;
    for (std::size_t d = 0; d < shape_.order(); ++d) {
        if (std::find(modes_.begin(), modes_.end(), d + 1) == modes_.end()) rows *= static_cast<Index>(shape_.dim(d));
    }
    return sum_constraints(shape_, modes_, Eigen::VectorXd::Ones(rows));
}

Index SumToOneSampler::inner_dimension() const {
    if (generic_) return generic_->inner_dimension();
    const auto jl = static_cast<Index>(shape_.dim(shape_.order() - 1));
    return (jl - 1) * (static_cast<Index>(shape_.size()) / jl);
}

Eigen::VectorXd SumToOneSampler::map(const Eigen::VectorXd& x) const {
    require_length(x, inner_dimension(), "sampler input");
    if (generic_) return generic_->mean() + generic_->apply_sqrt(x);
    const auto jl = static_cast<Index>(shape_.dim(shape_.order() - 1));
    const Index m = static_cast<Index>(shape_.size()) / jl;
    Eigen::VectorXd w(static_cast<Index>(shape_.size()));
    auto first = w.head(m);
    first.setZero();
    for (Index i = 1; i < jl; ++i) {
        const auto xi = x.segment((i - 1) * m, m);
        first += xi;
        w.segment(i * m, m) = -sigma_ * xi;
    }
    first *= sigma_;
    w.array() += 1.0 / static_cast<double>(jl);
    return w;
}

Eigen::VectorXd SumToOneSampler::sample(std::mt19937_64& rng) const {
    if (generic_) return stk::sample(*generic_, rng);
    return map(standard_normal(inner_dimension(), rng));
}

Eigen::SparseMatrix<double> SumToOneSampler::basis() const {
    if (generic_) throw DomainError("block basis exists only for last-mode sums");
    const auto jl = static_cast<Index>(shape_.dim(shape_.order() - 1));
    const Index m = static_cast<Index>(shape_.size()) / jl;
    std::vector<Eigen::Triplet<double>> trip;
    for (Index i = 1; i < jl; ++i) {
        for (Index k = 0; k < m; ++k) {
            trip.emplace_back(k, (i - 1) * m + k, 1.0);
            trip.emplace_back(i * m + k, (i - 1) * m + k, -1.0);
        }
    }
    Eigen::SparseMatrix<double> b(static_cast<Index>(shape_.size()), (jl - 1) * m);
    b.setFromTriplets(trip.begin(), trip.end());
    return b;
}

PreflightReport preflight(const StructuredPrior& prior, const ConstraintSystem* cs, std::uint64_t seed,
                          const NumericOptions& opts) {
    PreflightReport report;
    auto fail = [&](std::string msg) {
        report.ok = false;
        report.failures.push_back(std::move(msg));
    };
    std::mt19937_64 rng(seed);
    const Index n = prior.size();
    const Eigen::VectorXd x = standard_normal(n, rng);
    const Eigen::VectorXd y = standard_normal(n, rng);
    const Eigen::VectorXd cx = prior.apply_covariance(x);
    const Eigen::VectorXd cy = prior.apply_covariance(y);
    const double tol = 1e-9 * std::max(1.0, cx.norm() * y.norm());

    if (std::abs(y.dot(cx) - x.dot(cy)) > tol) fail("covariance is not symmetric");
    if (x.dot(cx) < -tol) fail("covariance is not positive semi-definite");
    if (prior.is_scaled_projector() && prior.scale() > 0.0) {
        const double s2 = prior.scale() * prior.scale();
        if ((prior.apply_covariance(cx) / s2 - cx).norm() > 1e-9 * std::max(1.0, cx.norm())) {
            fail("covariance is not a scaled projector");
        }
    }
    if (cs) {
        if (!cs->is_satisfied(prior.mean(), opts.satisfaction_tolerance)) fail("prior mean violates the constraints");
        if (!cs->is_satisfied(sample(prior, rng), opts.satisfaction_tolerance)) {
            fail("prior sample violates the constraints");
        }
    }
    return report;
}

}  // namespace stk
