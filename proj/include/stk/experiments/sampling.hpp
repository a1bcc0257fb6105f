#pragma once

#include "stk/constraints.hpp"
#include "stk/experiments/report.hpp"
#include "stk/options.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stk::experiments {

struct SampleConfig {
    std::string structure = "hankel";
    std::vector<std::size_t> shape = {10, 10};
    /// Prior variance sigma_P^2.
    double sigma_p2 = 1.0;
    std::uint64_t seed = 1;
    std::size_t count = 1;
    NumericOptions options;
};

struct SampleResult {
    std::vector<Eigen::VectorXd> samples;
    ConstraintSystem constraints;
    /// How the prior was built: recursive_nullspace, explicit_basis, averaged_powers, cycle_basis.
    std::string route;
    std::optional<Json> prior_json;
    Json summary;
    double max_residual = 0.0;
};

const std::vector<std::string>& sample_structures();
/// Human-readable order and dimension limits per structure.
std::string supported_ranges();

/// Throws UsageError unless the structure and shape are supported.
void validate_sample_config(const SampleConfig& cfg);

/// Build the structure's prior by its prescribed route and draw `count` samples.
SampleResult run_sample(const SampleConfig& cfg, bool keep_prior = false);

/// samples.csv, summary.json, constraints.json and, when kept, prior.json.
void write_sample_outputs(const SampleResult& result, const std::string& out_dir);

}  // namespace stk::experiments
