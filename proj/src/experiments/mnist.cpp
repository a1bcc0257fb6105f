#include "stk/experiments/mnist.hpp"

#include "stk/errors.hpp"
#include "stk/permutation.hpp"
#include "stk/prior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stk::experiments {

namespace {

std::vector<std::size_t> subset(std::size_t total, std::size_t count, std::mt19937_64 rng) {
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(count);
    return idx;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx) {
    Eigen::MatrixXd out(static_cast<Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = m.row(static_cast<Index>(idx[i]));
    return out;
}

std::vector<int> labels_of(const std::vector<int>& labels, const std::vector<std::size_t>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(labels[i]);
    return out;
}

}  // namespace

double MnistResult::accuracy(const std::string& prior, double sigma_p2) const {
    for (const auto& r : rows) {
        if (r.prior == prior && r.sigma_p2 == sigma_p2) return r.accuracy;
    }
    throw DomainError("no MNIST result for prior " + prior);
}

Eigen::MatrixXd random_fourier_features(const Eigen::MatrixXd& x, const Eigen::MatrixXd& frequencies) {
    return (x * frequencies).array().cos().matrix();
}

Eigen::MatrixXd one_hot(const std::vector<int>& labels, int classes) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Index>(labels.size()), classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= classes) throw DomainError("label out of range");
        y(static_cast<Index>(i), labels[i]) = 1.0;
    }
    return y;
}

std::vector<int> predict_classes(const Eigen::MatrixXd& scores) {
    std::vector<int> out(static_cast<std::size_t>(scores.rows()));
    for (Index i = 0; i < scores.rows(); ++i) {
        // Softmax is monotone, so its argmax is the argmax of the scores; it is still formed
        // in shifted form to keep the probabilities finite.
        const Eigen::RowVectorXd e = (scores.row(i).array() - scores.row(i).maxCoeff()).exp();
        Index best = 0;
        (e / e.sum()).maxCoeff(&best);
        out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return out;
}

StructuredPrior classifier_prior(const std::string& name, std::size_t side, double sigma_p2) {
    const TensorShape shape{side, side};
    const double sigma = std::sqrt(sigma_p2);
    const auto n = static_cast<Index>(shape.size());
    if (name == "tikhonov") {
        return StructuredPrior(shape, Eigen::VectorXd::Zero(n),
                               DenseFactor{sigma * Eigen::MatrixXd::Identity(n, n)});
    }
    if (name == "symmetric") return prior_from_permutation(symmetric_permutation(shape), false, {}, sigma);
    if (name == "hankel") return prior_from_cycles(hankel_permutation(shape), false, {}, sigma);
    if (name == "circulant") return prior_from_permutation(circulant_permutation(shape), false, {}, sigma);
    throw UsageError("unknown classifier prior \"" + name + "\" (tikhonov, symmetric, hankel, circulant)");
}

MnistResult run_mnist(const MnistConfig& cfg, const DatasetBundle& data) {
    const std::size_t ntrain = static_cast<std::size_t>(data.train_images.pixels.rows());
    const std::size_t ntest = static_cast<std::size_t>(data.test_images.pixels.rows());
    if (cfg.train_size < 1 || cfg.train_size > ntrain) {
        throw UsageError("--train-size must lie in 1.." + std::to_string(ntrain));
    }
    if (cfg.test_size < 1 || cfg.test_size > ntest) throw UsageError("--test-size must lie in 1.." + std::to_string(ntest));
    if (!(cfg.sigma_e2 > 0.0)) throw UsageError("--sigma-e must be positive");

    const auto train_idx = subset(ntrain, cfg.train_size, random_stream(cfg.seed, 1));
    const auto test_idx = subset(ntest, cfg.test_size, random_stream(cfg.seed, 2));
    const auto m = static_cast<Index>(cfg.feature_side * cfg.feature_side);
    Eigen::MatrixXd freq(data.train_images.pixels.cols(), m);
    {
        std::mt19937_64 rng = random_stream(cfg.seed, 3);
        std::normal_distribution<double> nd(0.0, cfg.frequency_std);
        for (Index j = 0; j < freq.cols(); ++j) {
            for (Index i = 0; i < freq.rows(); ++i) freq(i, j) = nd(rng);
        }
    }
    const Eigen::MatrixXd phi = random_fourier_features(rows_of(data.train_images.pixels, train_idx), freq);
    const Eigen::MatrixXd phi_test = random_fourier_features(rows_of(data.test_images.pixels, test_idx), freq);
    const Eigen::MatrixXd y = one_hot(labels_of(data.train_labels, train_idx));
    const std::vector<int> truth = labels_of(data.test_labels, test_idx);
    const NoiseCovariance noise = ScaledIdentityNoise{cfg.sigma_e2};

    MnistResult out;
    for (double s2 : cfg.sigma_p2) {
        if (!(s2 > 0.0)) throw UsageError("--sigma-p values must be positive");
        for (const auto& name : cfg.priors) {
            const StructuredPrior prior = classifier_prior(name, cfg.feature_side, s2);
            const PreflightReport pre = preflight(prior, nullptr, cfg.seed);
            if (!pre.ok) throw NumericalError("prior " + name + " failed preflight: " + pre.failures.front(), 0.0);
            const Eigen::MatrixXd w = posterior_mean_columns(phi, y, noise, prior, cfg.form);
            const std::vector<int> pred = predict_classes(phi_test * w);
            std::size_t correct = 0;
            for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == truth[i];
            MnistRow row;
            row.prior = name;
            row.sigma_p2 = s2;
            row.accuracy = static_cast<double>(correct) / static_cast<double>(pred.size());
            if (cfg.spectra) row.spectrum = precision_singular_values(phi, noise, prior).posterior;
            out.rows.push_back(std::move(row));
        }
    }

    Json config{{"train_size", cfg.train_size},
                {"test_size", cfg.test_size},
                {"sigma_p2", cfg.sigma_p2},
                {"sigma_e2", cfg.sigma_e2},
                {"priors", cfg.priors},
                {"features", m},
                {"frequency_std", cfg.frequency_std},
                {"seed", cfg.seed},
                {"form", cfg.form == PrecisionForm::support ? "support" : "full_space"}};
    out.summary = manifest("mnist", config);
    Json table = Json::array();
    for (const auto& r : out.rows) {
        table.push_back(Json{{"prior", r.prior}, {"sigma_p2", r.sigma_p2}, {"accuracy", r.accuracy}});
    }
    out.summary["table"] = table;
    return out;
}

void write_mnist_outputs(const MnistResult& result, const std::string& out_dir) {
    CsvTable table({"prior", "sigma_p2", "accuracy"});
    for (const auto& r : result.rows) table.add_row({r.prior, format_double(r.sigma_p2), format_double(r.accuracy)});
    write_file(out_dir, "table2.csv", table.str());

    Index len = 0;
    for (const auto& r : result.rows) len = std::max(len, r.spectrum.size());
    if (len > 0) {
        std::vector<std::string> header{"i"};
        for (const auto& r : result.rows) header.push_back(r.prior + "@" + format_double(r.sigma_p2));
        CsvTable fig(header);
        for (Index i = 0; i < len; ++i) {
            std::vector<std::string> row{std::to_string(i + 1)};
            for (const auto& r : result.rows) row.push_back(format_double(i < r.spectrum.size() ? r.spectrum[i] : 0.0));
            fig.add_row(std::move(row));
        }
        write_file(out_dir, "fig2.csv", fig.str());
    }
    write_file(out_dir, "summary.json", dump_json(result.summary));
}

}  // namespace stk::experiments
