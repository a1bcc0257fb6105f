#include "stk/permutation.hpp"

#include "stk/errors.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

namespace stk {

namespace {

void require_equal_dims(const TensorShape& shape, const char* what) {
    if (!shape.all_dims_equal()) {
        throw UnsupportedShapeError(std::string(what) + " requires equal dimensions, got " +
                                    shape.to_string());
    }
}

std::vector<std::size_t> zero_index(std::size_t k, const TensorShape& shape) {
    std::vector<std::size_t> idx(shape.order());
    index_at(k, shape, idx);
    return idx;
}

// Lexicographic on (j_1, ..., j_D), j_1 most significant.
bool lex_less(std::size_t a, std::size_t b, const TensorShape& shape) {
    const auto ia = zero_index(a, shape);
    const auto ib = zero_index(b, shape);
    return std::lexicographical_compare(ia.begin(), ia.end(), ib.begin(), ib.end());
}

// Each group becomes one cycle visiting its members in lexicographic order.
template <class Key>
Permutation permutation_from_groups(const TensorShape& shape, std::map<Key, std::vector<std::size_t>> groups) {
    std::vector<std::size_t> map(shape.size());
    for (auto& [key, members] : groups) {
        std::sort(members.begin(), members.end(),
                  [&](std::size_t a, std::size_t b) { return lex_less(a, b, shape); });
        for (std::size_t i = 0; i < members.size(); ++i) {
            map[members[i]] = members[(i + 1) % members.size()];
        }
    }
    return Permutation(shape, std::move(map));
}

}  // namespace

Permutation::Permutation(TensorShape shape, std::vector<std::size_t> map)
    : shape_(std::move(shape)), map_(std::move(map)) {
    if (map_.size() != shape_.size()) {
        throw DomainError("permutation map has length " + std::to_string(map_.size()) +
                          ", shape " + shape_.to_string() + " has " + std::to_string(shape_.size()) +
                          " entries");
    }
    std::vector<bool> seen(map_.size(), false);
    for (std::size_t k = 0; k < map_.size(); ++k) {
        const std::size_t dst = map_[k];
        if (dst >= map_.size() || seen[dst]) {
            throw DomainError("permutation map is not a bijection (entry " + std::to_string(k + 1) + ")");
        }
        seen[dst] = true;
    }
}

Permutation Permutation::identity(const TensorShape& shape) {
    std::vector<std::size_t> map(shape.size());
    std::iota(map.begin(), map.end(), std::size_t{0});
    return Permutation(shape, std::move(map));
}

Permutation Permutation::from_one_based(const TensorShape& shape, const std::vector<std::size_t>& map) {
    std::vector<std::size_t> zero(map.size());
    for (std::size_t k = 0; k < map.size(); ++k) {
        if (map[k] == 0) throw DomainError("1-based permutation map contains 0");
        zero[k] = map[k] - 1;
    }
    return Permutation(shape, std::move(zero));
}

std::vector<std::size_t> Permutation::one_based_map() const {
    std::vector<std::size_t> out(map_);
    for (auto& v : out) ++v;
    return out;
}

Eigen::VectorXd Permutation::apply(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != map_.size()) {
        throw DomainError("permutation of size " + std::to_string(map_.size()) +
                          " applied to vector of length " + std::to_string(x.size()));
    }
    Eigen::VectorXd out(x.size());
    apply_into(x, out);
    return out;
}

void Permutation::apply_into(const Eigen::Ref<const Eigen::VectorXd>& in, Eigen::Ref<Eigen::VectorXd> out) const {
    const std::size_t n = map_.size();
    for (std::size_t k = 0; k < n; ++k) {
        out[static_cast<Index>(map_[k])] = in[static_cast<Index>(k)];
    }
}

Eigen::MatrixXd Permutation::apply_rows(const Eigen::MatrixXd& x) const {
    if (static_cast<std::size_t>(x.rows()) != map_.size()) {
        throw DomainError("permutation applied to matrix with wrong row count");
    }
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (std::size_t k = 0; k < map_.size(); ++k) {
        out.row(static_cast<Index>(map_[k])) = x.row(static_cast<Index>(k));
    }
    return out;
}

Eigen::SparseMatrix<double> Permutation::matrix() const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(map_.size());
    for (std::size_t k = 0; k < map_.size(); ++k) {
        trip.emplace_back(static_cast<Index>(map_[k]), static_cast<Index>(k), 1.0);
    }
    const auto n = static_cast<Index>(map_.size());
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

std::vector<std::size_t> CycleSet::sizes() const {
    std::vector<std::size_t> out;
    out.reserve(cycles.size());
    for (const auto& c : cycles) out.push_back(c.size());
    return out;
}

std::vector<std::vector<std::size_t>> CycleSet::one_based() const {
    auto out = cycles;
    for (auto& c : out) {
        for (auto& k : c) ++k;
    }
    return out;
}

Eigen::VectorXd apply(const Permutation& perm, const Eigen::VectorXd& x) {
    return perm.apply(x);
}

CycleSet cycles(const Permutation& perm) {
    CycleSet out;
    const auto& p = perm.map();
    std::vector<bool> visited(p.size(), false);
    // Scanning in increasing order makes each cycle start at its smallest member.
    for (std::size_t start = 0; start < p.size(); ++start) {
        if (visited[start]) continue;
        std::vector<std::size_t> cyc;
        std::size_t k = start;
        while (!visited[k]) {
            visited[k] = true;
            cyc.push_back(k);
            k = p[k];
        }
        out.cycles.push_back(std::move(cyc));
    }
    return out;
}

Permutation from_cycles(const TensorShape& shape, const CycleSet& cs) {
    std::vector<std::size_t> map(shape.size(), shape.size());
    for (const auto& c : cs.cycles) {
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c[i] >= map.size()) throw DomainError("cycle member out of range");
            map[c[i]] = c[(i + 1) % c.size()];
        }
    }
    return Permutation(shape, std::move(map));
}

PermutationOrder order(const CycleSet& cs) {
    // Distinct lengths only; lcm over them is the same.
    std::vector<std::size_t> lengths = cs.sizes();
    std::sort(lengths.begin(), lengths.end());
    lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());
    PermutationOrder k = 1;
    for (std::size_t len : lengths) {
        const PermutationOrder l = len;
        k = k / boost::multiprecision::gcd(k, l) * l;
    }
    return k;
}

PermutationOrder order(const Permutation& perm) {
    return order(cycles(perm));
}

std::optional<std::uint64_t> order_u64(const PermutationOrder& k) {
    if (k > PermutationOrder(std::numeric_limits<std::uint64_t>::max())) return std::nullopt;
    return k.convert_to<std::uint64_t>();
}

Permutation cyclic_shift_permutation(const TensorShape& shape) {
    require_equal_dims(shape, "cyclic shift permutation");
    const std::size_t order = shape.order();
    std::vector<std::size_t> map(shape.size());
    std::vector<std::size_t> idx(order), dst(order);
    for (std::size_t k = 0; k < shape.size(); ++k) {
        index_at(k, shape, idx);
        dst[0] = idx[order - 1];
        for (std::size_t d = 1; d < order; ++d) dst[d] = idx[d - 1];
        map[k] = offset_of(dst, shape);
    }
    return Permutation(shape, std::move(map));
}

Permutation symmetric_permutation(const TensorShape& shape) {
    require_equal_dims(shape, "symmetric permutation");
    std::map<std::vector<std::size_t>, std::vector<std::size_t>> orbits;
    std::vector<std::size_t> idx(shape.order());
    for (std::size_t k = 0; k < shape.size(); ++k) {
        index_at(k, shape, idx);
        std::vector<std::size_t> key(idx);
        std::sort(key.begin(), key.end());
        orbits[key].push_back(k);
    }
    return permutation_from_groups(shape, std::move(orbits));
}

Permutation centrosymmetric_permutation(const TensorShape& shape) {
    std::vector<std::size_t> map(shape.size());
    std::vector<std::size_t> idx(shape.order());
    for (std::size_t k = 0; k < shape.size(); ++k) {
        index_at(k, shape, idx);
        for (std::size_t d = 0; d < idx.size(); ++d) idx[d] = shape.dim(d) - 1 - idx[d];
        map[k] = offset_of(idx, shape);
    }
    return Permutation(shape, std::move(map));
}

Permutation hankel_permutation(const TensorShape& shape) {
    require_equal_dims(shape, "Hankel permutation");
    std::map<std::size_t, std::vector<std::size_t>> groups;
    std::vector<std::size_t> idx(shape.order());
    for (std::size_t k = 0; k < shape.size(); ++k) {
        index_at(k, shape, idx);
        groups[std::accumulate(idx.begin(), idx.end(), std::size_t{0})].push_back(k);
    }
    return permutation_from_groups(shape, std::move(groups));
}

Permutation toeplitz_permutation(const TensorShape& shape) {
    require_equal_dims(shape, "Toeplitz permutation");
    std::vector<std::size_t> map(shape.size());
    std::vector<std::size_t> idx(shape.order());
    for (std::size_t k = 0; k < shape.size(); ++k) {
        index_at(k, shape, idx);
        for (std::size_t d = 0; d < idx.size(); ++d) {
            idx[d] = (idx[d] + 1 == shape.dim(d)) ? 0 : idx[d] + 1;
        }
        map[k] = offset_of(idx, shape);
    }
    return Permutation(shape, std::move(map));
}

Permutation circulant_permutation(const TensorShape& shape) {
    require_equal_dims(shape, "circulant permutation");
    std::vector<std::size_t> map(shape.size());
    std::vector<std::size_t> idx(shape.order());
    for (std::size_t k = 0; k < shape.size(); ++k) {
        index_at(k, shape, idx);
        for (std::size_t d = 0; d < idx.size(); ++d) {
            // 1-based: j -> mod(j + 1, J), with 0 read as J.
            const std::size_t jd = shape.dim(d);
            std::size_t j = (idx[d] + 1 + 1) % jd;
            if (j == 0) j = jd;
            idx[d] = j - 1;
        }
        map[k] = offset_of(idx, shape);
    }
    return Permutation(shape, std::move(map));
}

}  // namespace stk
