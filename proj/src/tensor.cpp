#include "stk/tensor.hpp"

#include "stk/errors.hpp"

#include <cassert>
#include <limits>
#include <sstream>

namespace stk {

namespace {

std::size_t checked_product(const std::vector<std::size_t>& dims) {
    std::size_t total = 1;
    for (std::size_t d : dims) {
        if (d != 0 && total > std::numeric_limits<std::size_t>::max() / d) {
            throw DomainError("tensor size overflows the index range");
        }
        total *= d;
    }
    if (total > static_cast<std::size_t>(std::numeric_limits<Index>::max())) {
        throw DomainError("tensor size overflows the index range");
    }
    return total;
}

}  // namespace

TensorShape::TensorShape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) {
        throw DomainError("tensor order must be at least 1");
    }
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        if (dims_[d] == 0) {
            throw DomainError("dimension of mode " + std::to_string(d + 1) + " must be positive");
        }
    }
    size_ = checked_product(dims_);
    strides_.resize(dims_.size());
    std::size_t s = 1;
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        strides_[d] = s;
        s *= dims_[d];
    }
}

TensorShape::TensorShape(std::initializer_list<std::size_t> dims)
    : TensorShape(std::vector<std::size_t>(dims)) {}

TensorShape TensorShape::cube(std::size_t order, std::size_t dim) {
    return TensorShape(std::vector<std::size_t>(order, dim));
}

bool TensorShape::all_dims_equal() const noexcept {
    for (std::size_t d : dims_) {
        if (d != dims_.front()) return false;
    }
    return true;
}

std::string TensorShape::to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        if (d) os << ',';
        os << dims_[d];
    }
    os << ')';
    return os.str();
}

std::size_t linearize(const MultiIndex& mi, const TensorShape& shape) {
    if (mi.order() != shape.order()) {
        throw DomainError("multi-index has order " + std::to_string(mi.order()) +
                          " but shape has order " + std::to_string(shape.order()));
    }
    std::size_t k = 0;
    for (std::size_t d = 0; d < shape.order(); ++d) {
        const std::size_t j = mi[d];
        if (j < 1 || j > shape.dim(d)) {
            throw DomainError("index " + std::to_string(j) + " out of range for mode " +
                              std::to_string(d + 1) + " of size " + std::to_string(shape.dim(d)));
        }
        k += (j - 1) * shape.stride(d);
    }
    return k + 1;
}

MultiIndex delinearize(std::size_t k, const TensorShape& shape) {
    if (k < 1 || k > shape.size()) {
        throw DomainError("linear index " + std::to_string(k) + " out of range 1.." +
                          std::to_string(shape.size()));
    }
    std::vector<std::size_t> idx(shape.order());
    index_at(k - 1, shape, idx);
    for (auto& j : idx) ++j;
    return MultiIndex(std::move(idx));
}

std::size_t offset_of(std::span<const std::size_t> zero_based, const TensorShape& shape) {
    assert(zero_based.size() == shape.order());
    std::size_t k = 0;
    for (std::size_t d = 0; d < zero_based.size(); ++d) {
        k += zero_based[d] * shape.stride(d);
    }
    return k;
}

void index_at(std::size_t offset, const TensorShape& shape, std::span<std::size_t> zero_based_out) {
    assert(zero_based_out.size() == shape.order());
    for (std::size_t d = 0; d < shape.order(); ++d) {
        zero_based_out[d] = offset % shape.dim(d);
        offset /= shape.dim(d);
    }
}

KroneckerOperator::KroneckerOperator(std::vector<Eigen::MatrixXd> factors)
    : factors_(std::move(factors)) {
    if (factors_.empty()) {
        throw DomainError("Kronecker operator needs at least one factor");
    }
    rows_ = 1;
    cols_ = 1;
    for (const auto& f : factors_) {
        if (f.rows() == 0 || f.cols() == 0) {
            throw DomainError("Kronecker factors must be non-empty");
        }
        rows_ *= f.rows();
        cols_ *= f.cols();
    }
}

TensorShape KroneckerOperator::operand_shape() const {
    std::vector<std::size_t> dims;
    for (const auto& f : factors_) dims.push_back(static_cast<std::size_t>(f.cols()));
    return TensorShape(std::move(dims));
}

TensorShape KroneckerOperator::result_shape() const {
    std::vector<std::size_t> dims;
    for (const auto& f : factors_) dims.push_back(static_cast<std::size_t>(f.rows()));
    return TensorShape(std::move(dims));
}

Eigen::VectorXd KroneckerOperator::apply(const Eigen::VectorXd& w) const {
    if (w.size() != cols_) {
        throw DomainError("Kronecker operand has length " + std::to_string(w.size()) +
                          ", expected " + std::to_string(cols_));
    }
    Eigen::VectorXd cur = w;
    Eigen::VectorXd next;
    // Modes before d already carry result dims, modes after d still carry operand dims.
    Index left = 1;
    Index right = cols_;
    for (const auto& a : factors_) {
        const Index mid = a.cols();
        right /= mid;
        next.resize(left * a.rows() * right);
        for (Index t = 0; t < right; ++t) {
            Eigen::Map<const Eigen::MatrixXd> slab(cur.data() + left * mid * t, left, mid);
            Eigen::Map<Eigen::MatrixXd> out(next.data() + left * a.rows() * t, left, a.rows());
            out.noalias() = slab * a.transpose();
        }
        cur.swap(next);
        left *= a.rows();
    }
    return cur;
}

Eigen::MatrixXd KroneckerOperator::apply_columns(const Eigen::MatrixXd& w) const {
    Eigen::MatrixXd out(rows_, w.cols());
    for (Index c = 0; c < w.cols(); ++c) {
        out.col(c) = apply(w.col(c));
    }
    return out;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> KroneckerOperator::to_sparse() const {
    // Entry (r, c) of the product is prod_d A_d(r_d, c_d) with r, c split column-major.
    struct Nz {
        Index r, c;
        double v;
    };
    std::vector<Nz> acc{{0, 0, 1.0}};
    Index row_stride = 1;
    Index col_stride = 1;
    for (const auto& a : factors_) {
        std::vector<Nz> next;
        for (const auto& e : acc) {
            for (Index j = 0; j < a.cols(); ++j) {
                for (Index i = 0; i < a.rows(); ++i) {
                    const double v = a(i, j);
                    if (v != 0.0) {
                        next.push_back({e.r + i * row_stride, e.c + j * col_stride, e.v * v});
                    }
                }
            }
        }
        acc.swap(next);
        row_stride *= a.rows();
        col_stride *= a.cols();
    }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(acc.size());
    for (const auto& e : acc) trip.emplace_back(e.r, e.c, e.v);
    Eigen::SparseMatrix<double, Eigen::RowMajor> m(rows_, cols_);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

Eigen::MatrixXd KroneckerOperator::to_dense() const {
    return Eigen::MatrixXd(to_sparse());
}

Eigen::VectorXd apply_kronecker(const KroneckerOperator& op, const Eigen::VectorXd& w) {
    return op.apply(w);
}

}  // namespace stk
