#pragma once

#include "stk/experiments/idx.hpp"
#include "stk/experiments/report.hpp"
#include "stk/posterior.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace stk::experiments {

struct MnistConfig {
    std::size_t train_size = 2000;
    std::size_t test_size = 1000;
    std::vector<double> sigma_p2 = {1e-6, 1e-3};
    double sigma_e2 = 1.0;
    std::vector<std::string> priors = {"tikhonov", "symmetric", "hankel", "circulant"};
    /// Side of the square feature grid; side^2 random Fourier features.
    std::size_t feature_side = 25;
    /// Standard deviation of each frequency component.
    double frequency_std = 0.2;
    std::uint64_t seed = 1;
    PrecisionForm form = PrecisionForm::full_space;
    bool spectra = true;
};

struct MnistRow {
    std::string prior;
    double sigma_p2 = 0.0;
    double accuracy = 0.0;
    Eigen::VectorXd spectrum;
};

struct MnistResult {
    std::vector<MnistRow> rows;
    Json summary;

    double accuracy(const std::string& prior, double sigma_p2) const;
};

/// cos(x^T v_j) for the columns v_j of `frequencies`, one row per input row.
Eigen::MatrixXd random_fourier_features(const Eigen::MatrixXd& x, const Eigen::MatrixXd& frequencies);

/// Row i is e_{label_i}.
Eigen::MatrixXd one_hot(const std::vector<int>& labels, int classes = 10);

/// Index of the largest softmax probability in each row.
std::vector<int> predict_classes(const Eigen::MatrixXd& scores);

/// Zero-mean prior over a side x side parameter matrix.
StructuredPrior classifier_prior(const std::string& name, std::size_t side, double sigma_p2);

/// Subset from stream 1 (train) and 2 (test), frequencies from stream 3 of the seed.
MnistResult run_mnist(const MnistConfig& cfg, const DatasetBundle& data);

/// table2.csv, fig2.csv, summary.json.
void write_mnist_outputs(const MnistResult& result, const std::string& out_dir);

}  // namespace stk::experiments
