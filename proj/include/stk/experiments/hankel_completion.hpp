#pragma once

#include "stk/experiments/report.hpp"
#include "stk/posterior.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace stk::experiments {

struct HankelConfig {
    std::size_t dim = 10;
    /// Fraction of entries measured.
    double rate = 0.5;
    double sigma_p2 = 1e-6;
    double sigma_e2 = 1.0;
    /// Noise covariance assumed by the estimators: "white" or "structured".
    std::string noise = "white";
    /// Draw the data with Hankel-structured noise y = Phi (w + e) instead of white noise.
    bool structured_data = false;
    bool with_replacement = false;
    Index rank = 19;
    std::uint64_t seed = 1;
    /// Standard deviation of each distinct value of the ground-truth matrix.
    double truth_scale = 10.0;
};

struct EstimateRow {
    std::string name;
    Eigen::VectorXd estimate;
    double relative_error = 0.0;
    double hankel_residual = 0.0;
};

struct HankelResult {
    Eigen::VectorXd truth;
    /// 0-based measured entries, in draw order.
    std::vector<std::size_t> mask;
    Eigen::VectorXd y;
    Eigen::VectorXd w0;
    std::vector<EstimateRow> rows;
    PrecisionSpectra spectra;
    std::vector<std::string> warnings;
    Json summary;

    const EstimateRow& row(const std::string& name) const;
};

/// Truth from stream 1, mask from stream 2, noise from stream 3 of the seed, so runs that differ
/// only in the assumed noise covariance share their data.
HankelResult run_hankel_completion(const HankelConfig& cfg);

/// table1.csv, estimates.csv, measurements.csv, fig1.csv, summary.json.
void write_hankel_outputs(const HankelResult& result, const std::string& out_dir);

}  // namespace stk::experiments
