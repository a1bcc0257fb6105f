#include "stk/experiments/hankel_completion.hpp"

#include "stk/errors.hpp"
#include "stk/permutation.hpp"
#include "stk/prior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stk::experiments {

namespace {

double relative(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double nb = b.norm();
    return nb > 0.0 ? (a - b).norm() / nb : (a - b).norm();
}

}  // namespace

const EstimateRow& HankelResult::row(const std::string& name) const {
    for (const auto& r : rows) {
        if (r.name == name) return r;
    }
    throw DomainError("no estimate named " + name);
}

HankelResult run_hankel_completion(const HankelConfig& cfg) {
    if (cfg.dim < 2) throw UsageError("Hankel completion needs a dimension of at least 2");
    if (!(cfg.rate >= 0.0 && cfg.rate <= 1.0)) throw UsageError("--rate must lie in [0, 1]");
    if (!(cfg.sigma_p2 > 0.0) || !(cfg.sigma_e2 > 0.0)) throw UsageError("variances must be positive");
    if (cfg.noise != "white" && cfg.noise != "structured") throw UsageError("--noise must be white or structured");
    if (cfg.rank < 1) throw UsageError("--rank must be at least 1");

    const TensorShape shape{cfg.dim, cfg.dim};
    const auto n = static_cast<Index>(shape.size());
    const Permutation h = hankel_permutation(shape);
    const CycleSet cyc = cycles(h);
    const Eigen::SparseMatrix<double> v = cycle_basis(h, false);

    HankelResult out;

    // Each distinct value of the truth is N(0, truth_scale^2).
    {
        std::mt19937_64 rng = random_stream(cfg.seed, 1);
        std::normal_distribution<double> nd(0.0, 1.0);
        out.truth = Eigen::VectorXd::Zero(n);
        for (const auto& c : cyc.cycles) {
            const double value = cfg.truth_scale * nd(rng);
            for (std::size_t k : c) out.truth[static_cast<Index>(k)] = value;
        }
    }

    const auto count = static_cast<std::size_t>(std::llround(cfg.rate * static_cast<double>(n)));
    {
        std::mt19937_64 rng = random_stream(cfg.seed, 2);
        if (cfg.with_replacement) {
            std::uniform_int_distribution<std::size_t> ud(0, static_cast<std::size_t>(n) - 1);
            for (std::size_t i = 0; i < count; ++i) out.mask.push_back(ud(rng));
        } else {
            std::vector<std::size_t> all(static_cast<std::size_t>(n));
            std::iota(all.begin(), all.end(), std::size_t{0});
            std::shuffle(all.begin(), all.end(), rng);
            out.mask.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
        }
    }
    const auto nobs = static_cast<Index>(count);
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(nobs, n);
    for (Index i = 0; i < nobs; ++i) phi(i, static_cast<Index>(out.mask[static_cast<std::size_t>(i)])) = 1.0;
    if (nobs == 0) out.warnings.push_back("sampling rate gives no measurements: posterior equals prior");

    {
        std::mt19937_64 rng = random_stream(cfg.seed, 3);
        std::normal_distribution<double> nd(0.0, 1.0);
        const double se = std::sqrt(cfg.sigma_e2);
        if (cfg.structured_data) {
            Eigen::VectorXd x(v.cols());
            for (Index r = 0; r < x.size(); ++r) x[r] = nd(rng);
            out.y = phi * (out.truth + se * (v * x));
        } else {
            out.y = phi * out.truth;
            for (Index i = 0; i < nobs; ++i) out.y[i] += se * nd(rng);
        }
    }

    // Prior mean: average of the measurements on each antidiagonal, zero where none were taken.
    {
        std::vector<double> sum(cyc.count(), 0.0);
        std::vector<std::size_t> hits(cyc.count(), 0);
        std::vector<std::size_t> cycle_of(static_cast<std::size_t>(n));
        for (std::size_t r = 0; r < cyc.count(); ++r) {
            for (std::size_t k : cyc.cycles[r]) cycle_of[k] = r;
        }
        for (Index i = 0; i < nobs; ++i) {
            const std::size_t r = cycle_of[out.mask[static_cast<std::size_t>(i)]];
            sum[r] += out.y[i];
            ++hits[r];
        }
        out.w0 = Eigen::VectorXd::Zero(n);
        for (std::size_t r = 0; r < cyc.count(); ++r) {
            if (hits[r] == 0) continue;
            for (std::size_t k : cyc.cycles[r]) out.w0[static_cast<Index>(k)] = sum[r] / static_cast<double>(hits[r]);
        }
    }

    const StructuredPrior prior = prior_from_cycles(h, false, out.w0, std::sqrt(cfg.sigma_p2));
    ForwardModel model{phi, out.y, ScaledIdentityNoise{cfg.sigma_e2}};
    if (cfg.noise == "structured") model.noise = projected_structured_noise(cfg.sigma_e2, phi, prior);

    auto add = [&](std::string name, Eigen::VectorXd est, const std::vector<std::string>& warnings) {
        EstimateRow r;
        r.name = std::move(name);
        r.relative_error = relative(est, out.truth);
        const double ne = est.norm();
        r.hankel_residual = ne > 0.0 ? (h.apply(est) - est).norm() / ne : 0.0;
        r.estimate = std::move(est);
        out.rows.push_back(std::move(r));
        for (const auto& w : warnings) {
            if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end()) out.warnings.push_back(w);
        }
    };
    const GaussianPosterior backslash = solve_sqrt(model, prior);
    add("backslash", backslash.mean, backslash.warnings);
    const GaussianPosterior truncated = truncated_svd_solve(model, prior, cfg.rank);
    add("truncated_svd", truncated.mean, truncated.warnings);
    add("max_likelihood", max_likelihood(model), {});
    const GaussianPosterior full = solve_pseudo_precision(model, prior);
    add("backslash_full_space", full.mean, {});
    const GaussianPosterior full_trunc = truncated_svd_solve(model, prior, cfg.rank, PrecisionForm::full_space);
    add("truncated_svd_full_space", full_trunc.mean, full_trunc.warnings);

    out.spectra = precision_singular_values(phi, model.noise, prior);

    Json config{{"dim", cfg.dim},
                {"rate", cfg.rate},
                {"sigma_p2", cfg.sigma_p2},
                {"sigma_e2", cfg.sigma_e2},
                {"noise", cfg.noise},
                {"structured_data", cfg.structured_data},
                {"with_replacement", cfg.with_replacement},
                {"rank", cfg.rank},
                {"seed", cfg.seed},
                {"truth_scale", cfg.truth_scale}};
    out.summary = manifest("hankel-complete", config);
    Json table = Json::array();
    for (const auto& r : out.rows) {
        table.push_back(
            Json{{"estimator", r.name}, {"relative_error", r.relative_error}, {"hankel_residual", r.hankel_residual}});
    }
    out.summary["table"] = table;
    out.summary["measurements"] = nobs;
    out.summary["warnings"] = out.warnings;
    return out;
}

void write_hankel_outputs(const HankelResult& result, const std::string& out_dir) {
    CsvTable table({"estimator", "relative_error", "hankel_residual"});
    for (const auto& r : result.rows) {
        table.add_row({r.name, format_double(r.relative_error), format_double(r.hankel_residual)});
    }
    write_file(out_dir, "table1.csv", table.str());

    std::vector<std::string> header{"k", "truth", "w0"};
    for (const auto& r : result.rows) header.push_back(r.name);
    CsvTable est(header);
    for (Index k = 0; k < result.truth.size(); ++k) {
        std::vector<std::string> row{std::to_string(k + 1), format_double(result.truth[k]), format_double(result.w0[k])};
        for (const auto& r : result.rows) row.push_back(format_double(r.estimate[k]));
        est.add_row(std::move(row));
    }
    write_file(out_dir, "estimates.csv", est.str());

    CsvTable meas({"row", "k", "y"});
    for (std::size_t i = 0; i < result.mask.size(); ++i) {
        meas.add_row({std::to_string(i + 1), std::to_string(result.mask[i] + 1),
                      format_double(result.y[static_cast<Index>(i)])});
    }
    write_file(out_dir, "measurements.csv", meas.str());

    CsvTable fig({"i", "prior", "likelihood", "posterior"});
    const Index len = result.spectra.posterior.size();
    auto at = [](const Eigen::VectorXd& s, Index i) { return i < s.size() ? s[i] : 0.0; };
    for (Index i = 0; i < len; ++i) {
        fig.add_row({std::to_string(i + 1), format_double(at(result.spectra.prior, i)),
                     format_double(at(result.spectra.likelihood, i)), format_double(at(result.spectra.posterior, i))});
    }
    write_file(out_dir, "fig1.csv", fig.str());
    write_file(out_dir, "summary.json", dump_json(result.summary));
}

}  // namespace stk::experiments
