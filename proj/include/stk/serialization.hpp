#pragma once

#include "stk/constraints.hpp"
#include "stk/permutation.hpp"
#include "stk/prior.hpp"
#include "stk/tensor.hpp"

#include <json.hpp>

#include <string>

namespace stk {

using Json = nlohmann::json;

/// All indices in these documents are 1-based; vectors use the column-major vec order.
Json to_json(const TensorShape& shape);
Json to_json(const Permutation& perm);
Json to_json(const CycleSet& cycles);
Json to_json(const ConstraintSystem& cs);
Json to_json(const StructuredPrior& prior);
Json to_json(const Eigen::MatrixXd& m);

TensorShape shape_from_json(const Json& j);
Permutation permutation_from_json(const Json& j);
CycleSet cycles_from_json(const Json& j);
ConstraintSystem constraints_from_json(const Json& j);
StructuredPrior prior_from_json(const Json& j);
Eigen::MatrixXd matrix_from_json(const Json& j);

/// Parse text, reporting syntax errors as FormatError with the byte offset.
Json parse_json(const std::string& text);

}  // namespace stk
