#include "stk/experiments/sampling.hpp"

#include "stk/nullspace.hpp"
#include "stk/permutation.hpp"
#include "stk/prior.hpp"
#include "stk/serialization.hpp"

#include <algorithm>
#include <cmath>

namespace stk::experiments {

namespace {

struct Range {
    const char* structure;
    std::size_t min_order, max_order, min_dim, max_dim;
    bool equal_dims;
};

const std::vector<Range>& ranges() {
    static const std::vector<Range> r = {
        {"triangular", 2, 5, 2, 6, true},     {"sum-to-one", 2, 5, 2, 10, false},
        {"symmetric", 2, 3, 2, 10, true},     {"hankel", 2, 4, 2, 10, true},
        {"toeplitz", 2, 4, 2, 10, true},      {"circulant", 2, 4, 2, 10, true},
        {"centrosymmetric", 1, 4, 1, 10, false}, {"cyclic-symmetric", 2, 5, 2, 10, true},
    };
    return r;
}

Permutation structure_permutation(const std::string& s, const TensorShape& shape) {
    if (s == "symmetric") return symmetric_permutation(shape);
    if (s == "hankel") return hankel_permutation(shape);
    if (s == "toeplitz") return toeplitz_permutation(shape);
    if (s == "circulant") return circulant_permutation(shape);
    if (s == "centrosymmetric") return centrosymmetric_permutation(shape);
    return cyclic_shift_permutation(shape);
}

std::string shape_text(const std::vector<std::size_t>& shape) {
    std::string s;
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s;
}

}  // namespace

const std::vector<std::string>& sample_structures() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& r : ranges()) v.emplace_back(r.structure);
        return v;
    }();
    return names;
}

std::string supported_ranges() {
    std::string s;
    for (const auto& r : ranges()) {
        s += "  " + std::string(r.structure) + ": order " + std::to_string(r.min_order) + "-" +
             std::to_string(r.max_order) + ", dimensions " + std::to_string(r.min_dim) + "-" +
             std::to_string(r.max_dim) + (r.equal_dims ? " (all equal)" : "") + "\n";
    }
    return s;
}

void validate_sample_config(const SampleConfig& cfg) {
    const auto it = std::find_if(ranges().begin(), ranges().end(),
                                 [&](const Range& r) { return cfg.structure == r.structure; });
    if (it == ranges().end()) {
        throw UsageError("unknown structure \"" + cfg.structure + "\"; supported:\n" + supported_ranges());
    }
    const auto& sh = cfg.shape;
    bool ok = sh.size() >= it->min_order && sh.size() <= it->max_order;
    for (std::size_t d : sh) ok = ok && d >= it->min_dim && d <= it->max_dim;
    if (it->equal_dims) ok = ok && std::all_of(sh.begin(), sh.end(), [&](std::size_t d) { return d == sh.front(); });
    if (!ok) {
        throw UsageError("shape (" + shape_text(sh) + ") is not supported for " + cfg.structure + "; supported:\n" +
                         supported_ranges());
    }
    if (cfg.count < 1) throw UsageError("--count must be at least 1");
    if (!(cfg.sigma_p2 >= 0.0)) throw UsageError("--sigma-p must be non-negative");
}

SampleResult run_sample(const SampleConfig& cfg, bool keep_prior) {
    validate_sample_config(cfg);
    const TensorShape shape(cfg.shape);
    const double sigma = std::sqrt(cfg.sigma_p2);
    std::mt19937_64 rng = random_stream(cfg.seed, 1);

    Json info;
    auto result = [&](ConstraintSystem cs) {
        SampleResult r{{}, std::move(cs), {}, {}, {}, 0.0};
        return r;
    };

    SampleResult out = [&] {
        if (cfg.structure == "triangular") {
            auto r = result(triangular_constraints(shape, true));
            const Eigen::MatrixXd v2 = recursive_nullspace(r.constraints.blocks(), cfg.options);
            StructuredPrior prior(shape, Eigen::VectorXd::Zero(static_cast<Index>(shape.size())),
                                  DenseFactor{sigma * v2});
            r.route = "recursive_nullspace";
            info["nullity"] = v2.cols();
            for (std::size_t i = 0; i < cfg.count; ++i) r.samples.push_back(sample(prior, rng));
            if (keep_prior) r.prior_json = to_json(prior);
            return r;
        }
        if (cfg.structure == "sum-to-one") {
            SumToOneSampler sampler(shape, {shape.order()}, sigma, cfg.options);
            auto r = result(sampler.constraints());
            r.route = "explicit_basis";
            info["inner_dimension"] = sampler.inner_dimension();
            for (std::size_t i = 0; i < cfg.count; ++i) r.samples.push_back(sampler.sample(rng));
            return r;
        }
        const Permutation perm = structure_permutation(cfg.structure, shape);
        auto r = result(invariance_constraints(perm, false));
        const PermutationOrder k = order(perm);
        info["order"] = k.str();
        info["cycles"] = cycles(perm).count();
        // Symmetric tensors use averaged powers, Hankel tensors the cycle basis.
        const bool use_cycles = cfg.structure == "hankel" ||
                                (cfg.structure != "symmetric" && k > PermutationOrder(cfg.options.cycle_route_order));
        const StructuredPrior prior = use_cycles ? prior_from_cycles(perm, false, {}, sigma, cfg.options)
                                                 : prior_from_permutation(perm, false, {}, sigma, cfg.options);
        r.route = use_cycles ? "cycle_basis" : "averaged_powers";
        for (std::size_t i = 0; i < cfg.count; ++i) r.samples.push_back(sample(prior, rng));
        if (keep_prior) r.prior_json = to_json(prior);
        return r;
    }();

    for (const auto& w : out.samples) {
        const Eigen::VectorXd res = out.constraints.residual(w);
        if (res.size() > 0) out.max_residual = std::max(out.max_residual, res.cwiseAbs().maxCoeff());
    }
    info["route"] = out.route;
    info["count"] = cfg.count;
    info["max_constraint_residual"] = out.max_residual;
    Json config{{"structure", cfg.structure},
                {"shape", cfg.shape},
                {"sigma_p2", cfg.sigma_p2},
                {"seed", cfg.seed},
                {"count", cfg.count}};
    out.summary = manifest("sample", config);
    out.summary["result"] = info;
    return out;
}

void write_sample_outputs(const SampleResult& result, const std::string& out_dir) {
    const TensorShape& shape = result.constraints.shape();
    std::vector<std::string> header{"k"};
    for (std::size_t d = 0; d < shape.order(); ++d) header.push_back("j" + std::to_string(d + 1));
    for (std::size_t s = 0; s < result.samples.size(); ++s) header.push_back("sample_" + std::to_string(s + 1));
    CsvTable csv(header);
    for (std::size_t k = 1; k <= shape.size(); ++k) {
        const MultiIndex mi = delinearize(k, shape);
        std::vector<std::string> row{std::to_string(k)};
        for (std::size_t j : mi.indices) row.push_back(std::to_string(j));
        for (const auto& w : result.samples) row.push_back(format_double(w[static_cast<Index>(k - 1)]));
        csv.add_row(std::move(row));
    }
    write_file(out_dir, "samples.csv", csv.str());
    write_file(out_dir, "summary.json", dump_json(result.summary));
    write_file(out_dir, "constraints.json", dump_json(to_json(result.constraints)));
    if (result.prior_json) write_file(out_dir, "prior.json", dump_json(*result.prior_json));
}

}  // namespace stk::experiments
