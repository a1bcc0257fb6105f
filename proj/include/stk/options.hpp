#pragma once

#include <cstddef>
#include <cstdint>

namespace stk {

/// Tolerances and size limits shared by the constraint, prior and posterior modules.
struct NumericOptions {
    /// |A w - b| entries at or below this count as satisfied.
    double satisfaction_tolerance = 1e-10;
    /// Singular values below scale * max(rows, cols) * eps * sigma_max are treated as zero.
    double rank_tolerance_scale = 1.0;
    /// Largest column count for which a constraint matrix may be formed densely.
    std::size_t dense_threshold = 4096;
    /// Averaged-powers priors refuse permutations of larger order.
    std::uint64_t max_average_order = 10000;
    /// Convenience selector switches to the cycle basis above this order.
    std::uint64_t cycle_route_order = 64;
};

}  // namespace stk
