#include "stk/serialization.hpp"

#include "stk/errors.hpp"

#include <cmath>

namespace stk {

namespace {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

Json vector_json(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Eigen::VectorXd vector_from_json(const Json& j) {
    if (!j.is_array()) throw DomainError("expected a numeric array");
    Eigen::VectorXd v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
    return v;
}

template <class Sparse>
Json triplets_json(const Sparse& m) {
    Json entries = Json::array();
    for (Index k = 0; k < m.outerSize(); ++k) {
        for (typename Sparse::InnerIterator it(m, k); it; ++it) {
            entries.push_back(Json::array({it.row() + 1, it.col() + 1, it.value()}));
        }
    }
    return entries;
}

template <class Sparse>
Sparse sparse_from_json(const Json& j) {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& e : j.at("entries")) {
        const auto r = e.at(0).get<Index>();
        const auto c = e.at(1).get<Index>();
        if (r < 1 || r > rows || c < 1 || c > cols) throw DomainError("sparse entry index out of range");
        trip.emplace_back(r - 1, c - 1, e.at(2).get<double>());
    }
    Sparse m(rows, cols);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

void require_format(const Json& j, const char* format) {
    if (!j.is_object() || !j.contains("format") || j.at("format") != format) {
        throw DomainError(std::string("expected a document with format \"") + format + "\"");
    }
}

}  // namespace

Json to_json(const TensorShape& shape) {
    return Json(shape.dims());
}

TensorShape shape_from_json(const Json& j) {
    return TensorShape(j.get<std::vector<std::size_t>>());
}

Json to_json(const Eigen::MatrixXd& m) {
    Json data = Json::array();
    for (Index c = 0; c < m.cols(); ++c) {
        for (Index r = 0; r < m.rows(); ++r) data.push_back(m(r, c));
    }
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const Json& data = j.at("data");
    if (static_cast<Index>(data.size()) != rows * cols) throw DomainError("matrix data has wrong length");
    Eigen::MatrixXd m(rows, cols);
    for (Index c = 0; c < cols; ++c) {
        for (Index r = 0; r < rows; ++r) m(r, c) = data[static_cast<std::size_t>(c * rows + r)].get<double>();
    }
    return m;
}

Json to_json(const Permutation& perm) {
    return Json{{"format", "stk.permutation/1"}, {"shape", to_json(perm.shape())}, {"map", perm.one_based_map()}};
}

Permutation permutation_from_json(const Json& j) {
    require_format(j, "stk.permutation/1");
    return Permutation::from_one_based(shape_from_json(j.at("shape")), j.at("map").get<std::vector<std::size_t>>());
}

Json to_json(const CycleSet& cycles) {
    return Json(cycles.one_based());
}

CycleSet cycles_from_json(const Json& j) {
    CycleSet cs;
    for (const auto& c : j) {
        std::vector<std::size_t> cyc;
        for (const auto& k : c) {
            const auto v = k.get<std::size_t>();
            if (v == 0) throw DomainError("cycle member 0 in a 1-based cycle list");
            cyc.push_back(v - 1);
        }
        cs.cycles.push_back(std::move(cyc));
    }
    return cs;
}

Json to_json(const ConstraintSystem& cs) {
    Json blocks = Json::array();
    for (std::size_t s = 0; s < cs.block_count(); ++s) {
        const ConstraintBlock& b = cs.blocks()[s];
        Json jb = std::visit(
            overloaded{[](const SparseRows& r) -> Json {
                           return Json{{"kind", "sparse_rows"},
                                       {"rows", r.matrix.rows()},
                                       {"cols", r.matrix.cols()},
                                       {"entries", triplets_json(r.matrix)}};
                       },
                       [](const KroneckerBlock& k) -> Json {
                           Json factors = Json::array();
                           for (const auto& f : k.op.factors()) factors.push_back(to_json(f));
                           return Json{{"kind", "kronecker"}, {"factors", factors}};
                       },
                       [](const PermutationDifference& p) -> Json {
                           return Json{{"kind", "permutation_difference"},
                                       {"lambda", p.lambda},
                                       {"map", p.perm.one_based_map()}};
                       }},
            b.get());
        jb["rhs"] = vector_json(cs.rhs()[s]);
        blocks.push_back(std::move(jb));
    }
    return Json{{"format", "stk.constraints/1"}, {"shape", to_json(cs.shape())}, {"blocks", blocks}};
}

ConstraintSystem constraints_from_json(const Json& j) {
    require_format(j, "stk.constraints/1");
    const TensorShape shape = shape_from_json(j.at("shape"));
    std::vector<ConstraintBlock> blocks;
    std::vector<Eigen::VectorXd> rhs;
    for (const auto& jb : j.at("blocks")) {
        const auto kind = jb.at("kind").get<std::string>();
        if (kind == "sparse_rows") {
            blocks.emplace_back(SparseRows{sparse_from_json<SparseRowMatrix>(jb)});
        } else if (kind == "kronecker") {
            std::vector<Eigen::MatrixXd> factors;
            for (const auto& f : jb.at("factors")) factors.push_back(matrix_from_json(f));
            blocks.emplace_back(KroneckerBlock{KroneckerOperator(std::move(factors))});
        } else if (kind == "permutation_difference") {
            blocks.emplace_back(PermutationDifference{
                jb.at("lambda").get<int>(),
                Permutation::from_one_based(shape, jb.at("map").get<std::vector<std::size_t>>())});
        } else {
            throw DomainError("unknown constraint block kind \"" + kind + "\"");
        }
        rhs.push_back(vector_from_json(jb.at("rhs")));
    }
    return ConstraintSystem(shape, std::move(blocks), std::move(rhs));
}

Json to_json(const StructuredPrior& prior) {
    Json j{{"format", "stk.prior/1"},
           {"shape", to_json(prior.shape())},
           {"w0", vector_json(prior.mean())},
           {"representation", prior.representation()}};
    std::visit(overloaded{[&](const DenseFactor& f) { j["factor"] = to_json(f.factor); },
                          [&](const SparseCycleBasis& v) {
                              j["basis"] = Json{{"rows", v.basis.rows()},
                                                {"cols", v.basis.cols()},
                                                {"entries", triplets_json(v.basis)}};
                              j["sigma"] = v.sigma;
                              j["sign"] = v.sign;
                          },
                          [&](const PermutationAverage& p) {
                              j["map"] = p.perm.one_based_map();
                              j["order"] = p.order;
                              j["sign"] = p.sign;
                              j["sigma"] = p.sigma;
                          }},
               prior.sqrt_covariance());
    return j;
}

StructuredPrior prior_from_json(const Json& j) {
    require_format(j, "stk.prior/1");
    TensorShape shape = shape_from_json(j.at("shape"));
    Eigen::VectorXd w0 = vector_from_json(j.at("w0"));
    const auto rep = j.at("representation").get<std::string>();
    if (rep == "dense_factor") {
        return StructuredPrior(shape, std::move(w0), DenseFactor{matrix_from_json(j.at("factor"))});
    }
    if (rep == "sparse_cycle_basis") {
        return StructuredPrior(shape, std::move(w0),
                               SparseCycleBasis{sparse_from_json<Eigen::SparseMatrix<double>>(j.at("basis")),
                                                j.at("sigma").get<double>(), j.at("sign").get<int>()});
    }
    if (rep == "permutation_average") {
        Permutation perm = Permutation::from_one_based(shape, j.at("map").get<std::vector<std::size_t>>());
        return StructuredPrior(shape, std::move(w0),
                               PermutationAverage{std::move(perm), j.at("order").get<std::uint64_t>(),
                                                  j.at("sign").get<int>(), j.at("sigma").get<double>()});
    }
    throw DomainError("unknown prior representation \"" + rep + "\"");
}

Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw FormatError(std::string("malformed JSON: ") + e.what(), e.byte);
    }
}

}  // namespace stk
